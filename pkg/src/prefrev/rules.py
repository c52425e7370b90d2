"""The voting-rule suite: scoring rules, Condorcet extensions, set-valued rules.

Every resolute rule takes a profile plus a :class:`TieBreak` and returns a
single alternative id; set-valued rules return frozensets.  All rules here
are pure functions of the profile, so they can back the paradox checkers
directly.  :class:`RuleTable` wraps an explicit lookup table (e.g. decoded
from a SAT model) behind the same callable interface.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from itertools import combinations
from typing import Callable, Iterable, Mapping, TextIO

from .errors import (
    BudgetExceeded,
    DomainMismatch,
    MissingEntry,
    MTooLargeForExactKemeny,
    PrefRevError,
    UnknownRule,
)
from .prefs import (
    Alternatives,
    LinearOrder,
    Profile,
    default_labels,
    enumerate_orders,
    num_profiles,
    profile_to_index,
)
from .tally import MarginMatrix, condorcet_winner, margin_matrix

Rule = Callable[[Profile], int]
SetRule = Callable[[Profile], frozenset[int]]

MAX_EXACT_KEMENY_M = 7
MAX_DODGSON_M = 6
MAX_DODGSON_N = 64


@dataclass(frozen=True, slots=True)
class ScoreVector:
    """Points per rank position (0-based), weakly decreasing."""

    s: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(self.s[i] < self.s[i + 1] for i in range(len(self.s) - 1)):
            raise PrefRevError(f"score vector must be weakly decreasing: {self.s}")

    @property
    def m(self) -> int:
        return len(self.s)


def borda_vector(m: int) -> ScoreVector:
    return ScoreVector(tuple(range(m - 1, -1, -1)))


def plurality_vector(m: int) -> ScoreVector:
    return ScoreVector((1,) + (0,) * (m - 1))


@dataclass(frozen=True, slots=True)
class TieBreak:
    """A fixed priority order over alternatives that resolves every tie."""

    priority: LinearOrder

    @classmethod
    def lexicographic(cls, m: int) -> "TieBreak":
        return cls(LinearOrder(tuple(range(m))))

    def best(self, alts: Iterable[int]) -> int:
        return self.priority.best_of(alts)

    def worst(self, alts: Iterable[int]) -> int:
        return self.priority.worst_of(alts)


def _argmax_set(scores: Mapping[int, float] | list) -> list[int]:
    items = list(enumerate(scores)) if isinstance(scores, list) else list(scores.items())
    top = max(v for _, v in items)
    return [a for a, v in items if v == top]


# --- scoring rules ----------------------------------------------------------


def scoring_winner(profile: Profile, score_vector: ScoreVector,
                   tie_break: TieBreak) -> int:
    if score_vector.m != profile.m:
        raise DomainMismatch(f"score vector length {score_vector.m} != m={profile.m}")
    totals = [0] * profile.m
    for vote in profile.votes:
        for pos, alt in enumerate(vote.ranking):
            totals[alt] += score_vector.s[pos]
    return tie_break.best(_argmax_set(totals))


def borda_winner(profile: Profile, tie_break: TieBreak) -> int:
    return scoring_winner(profile, borda_vector(profile.m), tie_break)


def plurality_winner(profile: Profile, tie_break: TieBreak) -> int:
    return scoring_winner(profile, plurality_vector(profile.m), tie_break)


# --- margin-based rules -----------------------------------------------------


def maximin_scores(profile_or_margins: Profile | MarginMatrix) -> list[int]:
    margins = _as_margins(profile_or_margins)
    return [
        min((margins.rows[a][b] for b in range(margins.m) if b != a), default=0)
        for a in range(margins.m)
    ]


def maximin_winner(profile: Profile, tie_break: TieBreak) -> int:
    return tie_break.best(_argmax_set(maximin_scores(profile)))


def black_winner(profile: Profile, tie_break: TieBreak) -> int:
    """Condorcet winner if one exists, Borda winner otherwise."""
    winner = condorcet_winner(profile)
    if winner is not None:
        return winner
    return borda_winner(profile, tie_break)


def _as_margins(profile_or_margins: Profile | MarginMatrix) -> MarginMatrix:
    if isinstance(profile_or_margins, MarginMatrix):
        return profile_or_margins
    return margin_matrix(profile_or_margins)


# --- set-valued rules over the strict majority relation ---------------------


def copeland_set(profile: Profile) -> frozenset[int]:
    """Alternatives maximising (majority wins - majority losses); ties count
    for neither side."""
    margins = margin_matrix(profile)
    m = margins.m
    scores = [
        sum(1 for b in range(m) if margins.rows[a][b] > 0)
        - sum(1 for b in range(m) if margins.rows[a][b] < 0)
        for a in range(m)
    ]
    return frozenset(_argmax_set(scores))


def uncovered_set(profile: Profile) -> frozenset[int]:
    """Alternatives not covered by any other.

    b covers a iff b beats a and b beats everything a beats (Gillies
    covering; on tournaments this is the standard uncovered set).
    """
    margins = margin_matrix(profile)
    m = margins.m

    def covers(b: int, a: int) -> bool:
        if margins.rows[b][a] <= 0:
            return False
        return all(margins.rows[b][c] > 0
                   for c in range(m)
                   if c not in (a, b) and margins.rows[a][c] > 0)

    return frozenset(a for a in range(m)
                     if not any(covers(b, a) for b in range(m) if b != a))


def top_cycle(profile: Profile) -> frozenset[int]:
    """The smallest set whose members strictly beat every non-member.

    Computed as the top strongly connected component of the ties-or-beats
    relation, which is complete, so the component ordering is linear.
    """
    margins = margin_matrix(profile)
    m = margins.m
    reach = [[margins.rows[a][b] >= 0 or a == b for b in range(m)] for a in range(m)]
    for k in range(m):
        for i in range(m):
            if reach[i][k]:
                row_i, row_k = reach[i], reach[k]
                for j in range(m):
                    if row_k[j]:
                        row_i[j] = True
    return frozenset(a for a in range(m) if all(reach[a][b] for b in range(m)))


# --- Kemeny -----------------------------------------------------------------


def kemeny_rankings(profile: Profile) -> tuple[LinearOrder, ...]:
    """All rankings maximising total pairwise agreement, by exhaustive scan.

    Returned in canonical enumeration order; always nonempty.
    """
    if profile.m > MAX_EXACT_KEMENY_M:
        raise MTooLargeForExactKemeny(
            f"exact Kemeny enumerates m! rankings; m={profile.m} > {MAX_EXACT_KEMENY_M}")
    margins = margin_matrix(profile)
    best_score: int | None = None
    best: list[LinearOrder] = []
    for order in enumerate_orders(profile.m):
        score = sum(margins.rows[a][b]
                    for a, b in combinations(order.ranking, 2))
        if best_score is None or score > best_score:
            best_score, best = score, [order]
        elif score == best_score:
            best.append(order)
    return tuple(best)


def kemeny_winner(profile: Profile, tie_break: TieBreak) -> int:
    rankings = kemeny_rankings(profile)
    pos = tie_break.priority.positions()
    chosen = min(rankings, key=lambda r: tuple(pos[a] for a in r.ranking))
    return chosen.top


# --- elimination rules --------------------------------------------------------


def _restricted_borda(profile: Profile, active: list[int]) -> dict[int, int]:
    scores = {a: 0 for a in active}
    active_set = set(active)
    for vote in profile.votes:
        below = len(active) - 1
        for alt in vote.ranking:
            if alt in active_set:
                scores[alt] += below
                below -= 1
    return scores


def baldwin_winner(profile: Profile, tie_break: TieBreak) -> int:
    """Repeatedly eliminate the single lowest-Borda alternative.

    Elimination ties are settled by removing the tie-break-lowest
    alternative among those tied.
    """
    active = list(range(profile.m))
    while len(active) > 1:
        scores = _restricted_borda(profile, active)
        low = min(scores.values())
        tied = [a for a in active if scores[a] == low]
        active.remove(tie_break.worst(tied))
    return active[0]


def nanson_winner(profile: Profile, tie_break: TieBreak) -> int:
    """Repeatedly eliminate everything strictly below the average Borda score."""
    active = list(range(profile.m))
    while len(active) > 1:
        scores = _restricted_borda(profile, active)
        average = sum(scores.values()) / len(active)
        eliminated = [a for a in active if scores[a] < average]
        if not eliminated:
            break
        active = [a for a in active if a not in eliminated]
    return tie_break.best(active)


# --- Dodgson ------------------------------------------------------------------


def dodgson_scores(profile: Profile) -> dict[int, int]:
    """Minimum adjacent swaps turning each alternative into the Condorcet winner.

    Only swaps that raise the target alternative x ever change x's pairwise
    contests, so the search reduces to choosing how far to raise x in each
    vote; a dynamic program over the remaining per-opponent deficits covers
    the choices exactly.
    """
    m, n = profile.m, profile.n
    if m > MAX_DODGSON_M or n > MAX_DODGSON_N:
        raise BudgetExceeded(
            f"exact Dodgson capped at m<={MAX_DODGSON_M}, n<={MAX_DODGSON_N} "
            f"(got m={m}, n={n})")
    margins = margin_matrix(profile)
    scores: dict[int, int] = {}
    for x in range(m):
        # voters that must newly switch to x over y: margin + 2k >= 1
        need = {y: max(0, (2 - margins.rows[x][y]) // 2)
                for y in range(m) if y != x}
        need = {y: k for y, k in need.items() if k > 0}
        if not need:
            scores[x] = 0
            continue
        targets = sorted(need)
        slot = {y: i for i, y in enumerate(targets)}
        frontier: dict[tuple[int, ...], int] = {tuple(need[y] for y in targets): 0}
        for vote in profile.votes:
            px = vote.position_of(x)
            # raising x by j passes the j alternatives directly above it;
            # only stop just after passing a deficit alternative
            options: list[tuple[int, tuple[int, ...]]] = [(0, ())]
            passed: list[int] = []
            for j in range(1, px + 1):
                passed.append(vote.ranking[px - j])
                if passed[-1] in need:
                    options.append((j, tuple(passed)))
            if len(options) == 1:
                continue
            new_frontier: dict[tuple[int, ...], int] = {}
            for state, cost in frontier.items():
                for jcost, covered in options:
                    cell = list(state)
                    for alt in covered:
                        i = slot.get(alt)
                        if i is not None and cell[i] > 0:
                            cell[i] -= 1
                    key = tuple(cell)
                    total = cost + jcost
                    if total < new_frontier.get(key, total + 1):
                        new_frontier[key] = total
            frontier = new_frontier
        done = tuple(0 for _ in targets)
        if done not in frontier:
            raise PrefRevError(f"no swap sequence makes {x} the Condorcet winner")
        scores[x] = frontier[done]
    return scores


def dodgson_winner(profile: Profile, tie_break: TieBreak) -> int:
    scores = dodgson_scores(profile)
    low = min(scores.values())
    return tie_break.best([a for a, s in scores.items() if s == low])


# --- Schulze and Ranked Pairs ---------------------------------------------------


def schulze_winner(profile: Profile, tie_break: TieBreak) -> int:
    """Widest-path (beatpath) strengths over the margin matrix."""
    margins = margin_matrix(profile)
    m = margins.m
    p = [list(row) for row in margins.rows]
    for k in range(m):
        for i in range(m):
            if i == k:
                continue
            pik = p[i][k]
            for j in range(m):
                if j != i and j != k:
                    w = pik if pik < p[k][j] else p[k][j]
                    if w > p[i][j]:
                        p[i][j] = w
    winners = [a for a in range(m)
               if all(p[a][b] >= p[b][a] for b in range(m) if b != a)]
    return tie_break.best(winners)


def ranked_pairs_winner(profile: Profile, tie_break: TieBreak) -> int:
    """Lock majority pairs by descending margin, skipping cycles.

    Equal margins are ordered by tie-break priority of the pair's winner,
    then of its loser.
    """
    margins = margin_matrix(profile)
    m = margins.m
    tpos = tie_break.priority.positions()
    pairs = sorted(
        ((a, b) for a in range(m) for b in range(m) if margins.rows[a][b] > 0),
        key=lambda ab: (-margins.rows[ab[0]][ab[1]], tpos[ab[0]], tpos[ab[1]]),
    )
    locked: list[set[int]] = [set() for _ in range(m)]

    def reaches(src: int, dst: int) -> bool:
        stack, seen = [src], {src}
        while stack:
            node = stack.pop()
            if node == dst:
                return True
            for nxt in locked[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    for a, b in pairs:
        if not reaches(b, a):
            locked[a].add(b)
    has_in = set()
    for a in range(m):
        has_in |= locked[a]
    return tie_break.best([a for a in range(m) if a not in has_in])


# --- explicit lookup tables -------------------------------------------------------


@dataclass(frozen=True)
class RuleTable:
    """A voting rule given extensionally, keyed by profile index or margins.

    ``chosen`` is a dense tuple over all (m!)^n profile indices in profile
    mode, or a mapping from margin-matrix keys to winners in c2 mode.
    """

    n: int
    m: int
    mode: str
    chosen: tuple[int, ...] | dict[str, int]

    def __post_init__(self) -> None:
        if self.mode not in ("profile", "c2"):
            raise PrefRevError(f"unknown table mode: {self.mode!r}")
        if self.mode == "profile" and len(self.chosen) != num_profiles(self.n, self.m):
            raise MissingEntry(
                f"profile table has {len(self.chosen)} entries, "
                f"needs {num_profiles(self.n, self.m)}")

    def lookup(self, profile: Profile) -> int:
        if profile.n != self.n or profile.m != self.m:
            raise DomainMismatch(
                f"table is for n={self.n}, m={self.m}; "
                f"profile has n={profile.n}, m={profile.m}")
        if self.mode == "profile":
            return self.chosen[profile_to_index(profile)]
        key = margin_matrix(profile).key()
        try:
            return self.chosen[key]
        except KeyError:
            raise MissingEntry(f"no entry for margin key {key}") from None

    __call__ = lookup

    def replace_entry(self, key: int | str, winner: int) -> "RuleTable":
        """A copy with one entry changed (used to plant violations in tests)."""
        if self.mode == "profile":
            chosen = list(self.chosen)
            chosen[key] = winner
            return RuleTable(self.n, self.m, self.mode, tuple(chosen))
        chosen = dict(self.chosen)
        chosen[key] = winner
        return RuleTable(self.n, self.m, self.mode, chosen)


def rule_table_lookup(table: RuleTable, profile: Profile) -> int:
    return table.lookup(profile)


def tabulate_rule(rule: Rule, n: int, m: int) -> RuleTable:
    """Materialise any resolute rule as a profile-mode table."""
    from .prefs import iter_profiles

    return RuleTable(n, m, "profile",
                     tuple(rule(p) for p in iter_profiles(n, m)))


def write_rule_table(table: RuleTable, sink: TextIO) -> None:
    labels = default_labels(table.m)
    sink.write(f"n={table.n} m={table.m} mode={table.mode}\n")
    if table.mode == "profile":
        for key, alt in enumerate(table.chosen):
            sink.write(f"{key},{labels[alt]}\n")
    else:
        for key in sorted(table.chosen):
            sink.write(f"{key},{labels[table.chosen[key]]}\n")


def read_rule_table(source: TextIO) -> RuleTable:
    header = source.readline().strip()
    fields = dict(part.split("=", 1) for part in header.split() if "=" in part)
    try:
        n, m, mode = int(fields["n"]), int(fields["m"]), fields["mode"]
    except KeyError:
        raise PrefRevError(f"bad rule-table header: {header!r}") from None
    alternatives = Alternatives(default_labels(m))
    entries: dict[str, int] = {}
    for raw in source:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, label = line.rsplit(",", 1)
        entries[key] = alternatives.id_of(label.strip())
    if mode == "profile":
        total = num_profiles(n, m)
        chosen = [None] * total
        for key, alt in entries.items():
            ix = int(key)
            if not 0 <= ix < total:
                raise MissingEntry(f"profile index {ix} out of range")
            chosen[ix] = alt
        missing = next((i for i, v in enumerate(chosen) if v is None), None)
        if missing is not None:
            raise MissingEntry(f"no entry for profile index {missing}")
        return RuleTable(n, m, "profile", tuple(chosen))
    return RuleTable(n, m, "c2", entries)


# --- registry -----------------------------------------------------------------


def _condorcet_rule(profile: Profile) -> int:
    winner = condorcet_winner(profile)
    if winner is None:
        raise DomainMismatch("the Condorcet rule is only defined on profiles "
                             "with a Condorcet winner")
    return winner


RESOLUTE_RULES = ("plurality", "borda", "black", "maximin", "kemeny",
                  "baldwin", "nanson", "dodgson", "schulze", "ranked-pairs",
                  "condorcet")
SET_RULES = ("copeland-set", "uncovered-set", "top-cycle")

_RESOLUTE_IMPL: dict[str, Callable[..., int]] = {
    "plurality": plurality_winner,
    "borda": borda_winner,
    "black": black_winner,
    "maximin": maximin_winner,
    "kemeny": kemeny_winner,
    "baldwin": baldwin_winner,
    "nanson": nanson_winner,
    "dodgson": dodgson_winner,
    "schulze": schulze_winner,
    "ranked-pairs": ranked_pairs_winner,
}

_SET_IMPL: dict[str, SetRule] = {
    "copeland-set": copeland_set,
    "uncovered-set": uncovered_set,
    "top-cycle": top_cycle,
}


def resolute_rule(name: str, m: int, tie_break: TieBreak | None = None) -> Rule:
    """A picklable resolute rule callable by registry name."""
    tie_break = tie_break or TieBreak.lexicographic(m)
    if name == "condorcet":
        return _condorcet_rule
    try:
        impl = _RESOLUTE_IMPL[name]
    except KeyError:
        raise UnknownRule(f"unknown rule {name!r}; known: "
                          f"{', '.join(RESOLUTE_RULES)}") from None
    return partial(impl, tie_break=tie_break)


def set_rule(name: str) -> SetRule:
    try:
        return _SET_IMPL[name]
    except KeyError:
        raise UnknownRule(f"unknown set rule {name!r}; known: "
                          f"{', '.join(SET_RULES)}") from None
