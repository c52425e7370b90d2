"""CNF pipeline: encode the axioms, emit DIMACS, decode models, re-verify.

``encode_full`` writes the three clause families over variables x[P, a]
("the rule picks a at P"): exactly-one-winner functionality, a unit clause
per Condorcet profile, and one binary clause per (voter, profile, ordered
pair) forbidding a reversal from strictly improving the outcome.  A
satisfying assignment is a Condorcet extension immune to the reversal
paradox, decodable into a :class:`~prefrev.rules.RuleTable`;
unsatisfiability is an impossibility proof for that electorate.

``encode_proof_neighborhood`` restricts the variables to the profiles of a
verified proof tree and is expected unsatisfiable; it is small enough to
hand to core-extraction tooling unchanged.

Solving is never done in-process: callers hand the DIMACS file to any
external solver binary and feed its output back through
:func:`read_dimacs_model`.
"""

from __future__ import annotations

import math
import shlex
import subprocess
from dataclasses import dataclass
from typing import Mapping, Sequence, TextIO

from .errors import (
    BudgetExceeded,
    MalformedModel,
    NotAFunction,
    PrefRevError,
    VariableOutOfRange,
)
from .prefs import (
    _reverse_index_table,
    enumerate_orders,
    index_to_profile,
    num_profiles,
)
from .proofcheck import ProofTree, replayed_carry
from .report import Report
from .rules import RuleTable
from .tally import condorcet_winner
from . import monotonicity, tally

DEFAULT_KEY_BUDGET = 1_000_000

Clause = tuple[int, ...]


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[Clause, ...]

    def __post_init__(self) -> None:
        for clause in self.clauses:
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise PrefRevError(f"bad literal {lit} in clause {clause}")

    def without_clause(self, clause: Clause) -> "CnfFormula":
        """A copy with one occurrence of ``clause`` removed (mutation tests)."""
        clauses = list(self.clauses)
        clauses.remove(clause)
        return CnfFormula(self.num_vars, tuple(clauses))


@dataclass(frozen=True)
class VariableMap:
    """Bijection between 1-based CNF variables and (key, alternative) pairs.

    Keys are profile indices (profile mode), margin-matrix strings (c2
    mode), or proof-tree node names (proof mode); in every mode
    ``var = key_rank * m + alternative + 1``.
    """

    n: int
    m: int
    mode: str
    keys: tuple[str, ...] | None = None  # None: profile mode, keys implicit

    @property
    def num_keys(self) -> int:
        return num_profiles(self.n, self.m) if self.keys is None else len(self.keys)

    @property
    def num_vars(self) -> int:
        return self.num_keys * self.m

    def var(self, key_rank: int, alt: int) -> int:
        return key_rank * self.m + alt + 1

    def decode_var(self, var: int) -> tuple[int, int]:
        if not 1 <= var <= self.num_vars:
            raise VariableOutOfRange(f"variable {var} not in 1..{self.num_vars}")
        return divmod(var - 1, self.m)

    def key_name(self, key_rank: int) -> str:
        if self.keys is None:
            return str(key_rank)
        return self.keys[key_rank]


@dataclass(frozen=True)
class EncodeResult:
    formula: CnfFormula
    varmap: VariableMap
    counts: dict[str, int]


# --- profile-mode encoding ---------------------------------------------------


def _profile_winner_digits(n: int, m: int):
    """Yield (key, digits, margin rows) for every profile index."""
    fact = math.factorial(m)
    cmp = [tally._comparison_matrix(m, o) for o in range(fact)]
    for key in range(fact ** n):
        rest = key
        digits = []
        for _ in range(n):
            rest, d = divmod(rest, fact)
            digits.append(d)
        digits.reverse()
        rows = [[0] * m for _ in range(m)]
        for d in digits:
            mat = cmp[d]
            for a in range(m):
                row = rows[a]
                mrow = mat[a]
                for b in range(m):
                    row[b] += mrow[b]
        yield key, digits, rows


def encode_full(n: int, m: int, mode: str = "profile", *,
                budget: int | None = None) -> EncodeResult:
    """The full formula whose models are the reversal-immune Condorcet
    extensions at (n, m).

    Profile mode spends one variable block per profile; c2 mode keys the
    blocks by realizable margin matrices instead (see
    :func:`enumerate_margin_keys` for the gating).
    """
    if mode == "profile":
        return _encode_full_profile(n, m, budget)
    if mode == "c2":
        return _encode_full_c2(n, m, budget)
    raise PrefRevError(f"unknown encode mode {mode!r}")


def _encode_full_profile(n: int, m: int, budget: int | None) -> EncodeResult:
    budget = DEFAULT_KEY_BUDGET if budget is None else budget
    total = num_profiles(n, m)
    if total > budget:
        raise BudgetExceeded(f"profile mode needs {total} keys, budget is {budget}",
                             scanned=0, total=total)
    fact = math.factorial(m)
    rev = _reverse_index_table(m)
    orders = enumerate_orders(m)
    varmap = VariableMap(n=n, m=m, mode="profile")
    var = varmap.var

    functionality: list[Clause] = []
    condorcet: list[Clause] = []
    hwm: list[Clause] = []
    for key, digits, rows in _profile_winner_digits(n, m):
        functionality.append(tuple(var(key, a) for a in range(m)))
        for a in range(m):
            for b in range(a + 1, m):
                functionality.append((-var(key, a), -var(key, b)))
        winner = next((a for a in range(m)
                       if all(rows[a][b] > 0 for b in range(m) if b != a)), None)
        if winner is not None:
            condorcet.append((var(key, winner),))
        for voter in range(n):
            d = digits[voter]
            place = fact ** (n - 1 - voter)
            rev_key = key + (rev[d] - d) * place
            ranking = orders[d].ranking
            for i in range(m):
                for j in range(i + 1, m):
                    above, below = ranking[i], ranking[j]
                    hwm.append((-var(key, below), -var(rev_key, above)))

    clauses = tuple(functionality + condorcet + hwm)
    counts = {"keys": total, "functionality": len(functionality),
              "condorcet": len(condorcet), "hwm": len(hwm)}
    return EncodeResult(CnfFormula(varmap.num_vars, clauses), varmap, counts)


# --- c2 (margin-keyed) encoding ------------------------------------------------


def enumerate_margin_keys(n: int, m: int, *,
                          budget: int | None = None
                          ) -> tuple[list[tuple[tuple[int, ...], ...]], dict[str, set[int]]]:
    """All margin matrices realizable by n voters, with their witness orders.

    Walks every vector of per-order vote counts summing to n, accumulating
    for each reachable margin matrix the set of orders that appear in at
    least one realization.  That set is exactly what makes a reversal
    clause sound for a margin key, so the encoder gates on it.
    """
    budget = DEFAULT_KEY_BUDGET if budget is None else budget
    fact = math.factorial(m)
    cmp = [tally._comparison_matrix(m, o) for o in range(fact)]
    seen: dict[str, tuple[tuple[int, ...], ...]] = {}
    witness_orders: dict[str, set[int]] = {}
    visited = 0

    rows = [[0] * m for _ in range(m)]
    used: list[int] = []

    def add(order_ix: int, times: int, sign: int) -> None:
        mat = cmp[order_ix]
        for a in range(m):
            row = rows[a]
            mrow = mat[a]
            for b in range(m):
                row[b] += sign * times * mrow[b]

    def walk(order_ix: int, remaining: int) -> None:
        nonlocal visited
        if order_ix == fact - 1:
            visited += 1
            if visited > budget:
                raise BudgetExceeded(
                    f"margin enumeration passed {budget} count vectors",
                    scanned=budget, total=budget)
            add(order_ix, remaining, +1)
            if remaining:
                used.append(order_ix)
            key = "_".join(str(x) for row in rows for x in row)
            if key not in seen:
                seen[key] = tuple(tuple(row) for row in rows)
                witness_orders[key] = set()
            witness_orders[key].update(used)
            if remaining:
                used.pop()
            add(order_ix, remaining, -1)
            return
        for count in range(remaining + 1):
            add(order_ix, count, +1)
            if count:
                used.append(order_ix)
            walk(order_ix + 1, remaining - count)
            if count:
                used.pop()
            add(order_ix, count, -1)

    walk(0, n)
    ordered = sorted(seen.values())
    return ordered, witness_orders


def _encode_full_c2(n: int, m: int, budget: int | None) -> EncodeResult:
    matrices, witness_orders = enumerate_margin_keys(n, m, budget=budget)
    keys = ["_".join(str(x) for row in rows for x in row) for rows in matrices]
    rank = {key: i for i, key in enumerate(keys)}
    orders = enumerate_orders(m)
    cmp = [tally._comparison_matrix(m, o) for o in range(len(orders))]
    varmap = VariableMap(n=n, m=m, mode="c2", keys=tuple(keys))
    var = varmap.var

    functionality: list[Clause] = []
    condorcet: list[Clause] = []
    hwm: list[Clause] = []
    for key_rank, rows in enumerate(matrices):
        functionality.append(tuple(var(key_rank, a) for a in range(m)))
        for a in range(m):
            for b in range(a + 1, m):
                functionality.append((-var(key_rank, a), -var(key_rank, b)))
        winner = next((a for a in range(m)
                       if all(rows[a][b] > 0 for b in range(m) if b != a)), None)
        if winner is not None:
            condorcet.append((var(key_rank, winner),))
        for order_ix in sorted(witness_orders[keys[key_rank]]):
            mat = cmp[order_ix]
            flipped = tuple(tuple(rows[a][b] - 2 * mat[a][b] for b in range(m))
                            for a in range(m))
            flipped_key = "_".join(str(x) for row in flipped for x in row)
            # reversing a witness voter lands on a realizable matrix again
            flipped_rank = rank[flipped_key]
            ranking = orders[order_ix].ranking
            for i in range(m):
                for j in range(i + 1, m):
                    above, below = ranking[i], ranking[j]
                    hwm.append((-var(key_rank, below), -var(flipped_rank, above)))

    clauses = tuple(functionality + condorcet + hwm)
    counts = {"keys": len(keys), "functionality": len(functionality),
              "condorcet": len(condorcet), "hwm": len(hwm)}
    return EncodeResult(CnfFormula(varmap.num_vars, clauses), varmap, counts)


# --- proof-neighborhood encoding ------------------------------------------------


def encode_proof_neighborhood(tree: ProofTree) -> EncodeResult:
    """A small CNF over just the tree's profiles, unsatisfiable iff no rule
    choice survives the tree's constraints.

    Edge clauses are the reversal-monotonicity consequences linking tail
    and head winners directly: picking b at the tail forbids at the head
    everything the replayed single reversals cannot reach from b.
    """
    names = tuple(tree.profiles)
    rank = {name: i for i, name in enumerate(names)}
    m = tree.m
    varmap = VariableMap(n=tree.n, m=m, mode="proof", keys=names)
    var = varmap.var

    functionality: list[Clause] = []
    condorcet: list[Clause] = []
    hwm: list[Clause] = []
    for name in names:
        key = rank[name]
        functionality.append(tuple(var(key, a) for a in range(m)))
        for a in range(m):
            for b in range(a + 1, m):
                functionality.append((-var(key, a), -var(key, b)))
    for leaf in tree.leaves:
        condorcet.append((var(rank[leaf.node], leaf.condorcet),))
    for edge in tree.edges:
        src, dst = rank[edge.src], rank[edge.dst]
        for b in range(m):
            reachable = replayed_carry(edge, frozenset((b,)))
            for a in range(m):
                if a not in reachable:
                    hwm.append((-var(src, b), -var(dst, a)))

    clauses = tuple(functionality + condorcet + hwm)
    counts = {"keys": len(names), "functionality": len(functionality),
              "condorcet": len(condorcet), "hwm": len(hwm)}
    return EncodeResult(CnfFormula(varmap.num_vars, clauses), varmap, counts)


def leaf_unit_clause(tree: ProofTree, varmap: VariableMap, node: str) -> Clause:
    """The Condorcet unit clause a given leaf contributes to the formula."""
    leaf = next(l for l in tree.leaves if l.node == node)
    rank = varmap.keys.index(node)  # type: ignore[union-attr]
    return (varmap.var(rank, leaf.condorcet),)


# --- DIMACS and models ------------------------------------------------------------


def write_dimacs(formula: CnfFormula, sink: TextIO) -> None:
    sink.write(f"p cnf {formula.num_vars} {len(formula.clauses)}\n")
    for clause in formula.clauses:
        sink.write(" ".join(str(lit) for lit in clause) + " 0\n")


def write_varmap(varmap: VariableMap, alternatives_labels: Sequence[str],
                 sink: TextIO) -> None:
    """Sidecar map: one ``<variable-id> <key> <alternative-label>`` per line."""
    for key_rank in range(varmap.num_keys):
        name = varmap.key_name(key_rank)
        for alt in range(varmap.m):
            sink.write(f"{varmap.var(key_rank, alt)} {name} "
                       f"{alternatives_labels[alt]}\n")


_STATUS_WORDS = {"SAT", "SATISFIABLE", "UNSAT", "UNSATISFIABLE"}


def read_dimacs_model(source: TextIO, varmap: VariableMap) -> dict[int, bool]:
    """Parse a solver's model output into a variable assignment.

    Accepts ``v``-prefixed literal lines and bare literal lists; ``c`` and
    ``s`` lines are ignored.  The assignment may stop at a ``0`` terminator.
    """
    assignment: dict[int, bool] = {}
    done = False
    saw_literal = False
    for raw in source:
        line = raw.strip()
        if not line or line[0] in "cs" and not _looks_numeric(line):
            continue
        if line.upper() in _STATUS_WORDS:
            continue
        if line.startswith(("v", "V")):
            line = line[1:]
        for token in line.split():
            if done:
                break
            try:
                lit = int(token)
            except ValueError:
                raise MalformedModel(f"non-integer token {token!r} in model") from None
            if lit == 0:
                done = True
                continue
            saw_literal = True
            var = abs(lit)
            if var > varmap.num_vars:
                raise VariableOutOfRange(
                    f"model mentions variable {var}, map has {varmap.num_vars}")
            value = lit > 0
            if assignment.get(var, value) != value:
                raise MalformedModel(f"model assigns variable {var} both ways")
            assignment[var] = value
    if not saw_literal:
        raise MalformedModel("no model literals found; was the formula "
                             "unsatisfiable or the file not a model?")
    return assignment


def _looks_numeric(line: str) -> bool:
    head = line.split(None, 1)[0]
    try:
        int(head)
        return True
    except ValueError:
        return False


def decode_model(assignment: Mapping[int, bool], varmap: VariableMap) -> RuleTable:
    """Turn a satisfying assignment into a lookup-table rule.

    Exactly one winner variable must be true per key; unassigned variables
    count as false.
    """
    if varmap.mode not in ("profile", "c2"):
        raise PrefRevError(f"cannot decode a rule from a {varmap.mode!r} map")
    winners: list[int] = []
    for key_rank in range(varmap.num_keys):
        true_alts = [alt for alt in range(varmap.m)
                     if assignment.get(varmap.var(key_rank, alt), False)]
        if len(true_alts) != 1:
            raise NotAFunction(
                f"key {varmap.key_name(key_rank)} has {len(true_alts)} winners")
        winners.append(true_alts[0])
    if varmap.mode == "profile":
        return RuleTable(varmap.n, varmap.m, "profile", tuple(winners))
    chosen = {varmap.keys[i]: winners[i] for i in range(varmap.num_keys)}
    return RuleTable(varmap.n, varmap.m, "c2", chosen)


# --- the independent re-check ------------------------------------------------------


def verify_rule(table: RuleTable, *, budget: int | None = None) -> Report:
    """Exhaustively re-check a decoded table without touching the CNF.

    Condorcet-consistency is recomputed per profile with the tally module;
    the reversal scan comes from the monotonicity checker.  Together they
    independently confirm what the formula was supposed to assert.
    """
    if table.mode != "profile":
        raise PrefRevError("verify_rule re-checks profile-mode tables; "
                           "expand a c2 table first")
    report = Report(f"rule table verification (n={table.n}, m={table.m})")
    total = num_profiles(table.n, table.m)
    bad = None
    for key in range(total):
        profile = index_to_profile(key, table.n, table.m)
        winner = condorcet_winner(profile)
        if winner is not None and table.chosen[key] != winner:
            bad = (key, winner, table.chosen[key])
            break
    report.add(bad is None,
               f"Condorcet-consistency over all {total} profiles"
               if bad is None else
               f"profile {bad[0]}: Condorcet winner {bad[1]}, table picks {bad[2]}")

    witness = None
    exhausted = None
    try:
        witness = monotonicity.check_halfway_monotonicity(
            table, table.n, table.m, budget=budget)
    except BudgetExceeded as exc:
        exhausted = exc
    if exhausted is not None:
        report.add(False, f"reversal scan stopped early: {exhausted}")
    elif witness is None:
        report.add(True, f"half-way monotonicity over all {total} profiles "
                         f"x {table.n} voters")
    else:
        report.add(False, f"profile index "
                          f"{_witness_index(witness)}, voter {witness.voter}: "
                          f"reversal moves the winner from "
                          f"{witness.winner_before} to {witness.winner_after}")
    return report


def _witness_index(witness: monotonicity.ReversalWitness) -> int:
    from .prefs import profile_to_index

    return profile_to_index(witness.profile)


# --- external solver ------------------------------------------------------------


@dataclass(frozen=True)
class SolverRun:
    status: str  # "SAT", "UNSAT", or "UNKNOWN"
    output: str
    returncode: int


def run_solver(command: str | Sequence[str], cnf_path: str,
               timeout: float | None = None) -> SolverRun:
    """Invoke an external DIMACS solver on a CNF file.

    The solver is any binary that takes the CNF path as its last argument
    and reports ``s SATISFIABLE`` / ``s UNSATISFIABLE`` (exit codes 10/20
    also recognised).  Models are read from its stdout.
    """
    argv = shlex.split(command) if isinstance(command, str) else list(command)
    proc = subprocess.run(argv + [cnf_path], capture_output=True, text=True,
                          timeout=timeout)
    status = "UNKNOWN"
    for line in proc.stdout.splitlines():
        upper = line.strip().upper()
        if upper in ("S SATISFIABLE", "SAT", "SATISFIABLE"):
            status = "SAT"
            break
        if upper in ("S UNSATISFIABLE", "UNSAT", "UNSATISFIABLE"):
            status = "UNSAT"
            break
    if status == "UNKNOWN":
        if proc.returncode == 10:
            status = "SAT"
        elif proc.returncode == 20:
            status = "UNSAT"
    return SolverRun(status=status, output=proc.stdout, returncode=proc.returncode)
