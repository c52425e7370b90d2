"""Checkers and witness searchers for the reversal and no-show paradoxes.

Every checker scans a full domain of profiles (all (m!)^n of them) in
ascending canonical index order, voter index second, so the first witness
returned is deterministic, including under parallel execution.  A ``None``
result from an exhaustive scan is a certificate that the property holds on
the whole domain; sampled scans only report on the profiles they visited.

Rules are plain callables from :class:`~prefrev.prefs.Profile` to an
alternative id (or to a frozenset for the set-valued checkers), so tables,
registry rules, and test fixtures all plug in unchanged.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping

from .errors import (
    BudgetExceeded,
    EmptyOutcomeSet,
    MissingSize,
    NotAViolation,
)
from .prefs import (
    Alternatives,
    LinearOrder,
    Profile,
    _reverse_index_table,
    enumerate_orders,
    format_order,
    format_profile,
    index_to_profile,
    num_profiles,
)

Rule = Callable[[Profile], int]
SetRule = Callable[[Profile], frozenset[int]]
# either one rule valid at every electorate size, or a mapping size -> rule
RuleFamily = Rule | Mapping[int, Rule]

DEFAULT_BUDGET = 10_000_000


@dataclass(frozen=True)
class ReversalWitness:
    """A voter who strictly gains by submitting their reversed ranking."""

    profile: Profile
    voter: int
    winner_before: int
    winner_after: int

    @property
    def truthful_order(self) -> LinearOrder:
        return self.profile.votes[self.voter]

    def is_violation(self) -> bool:
        return self.truthful_order.prefers(self.winner_after, self.winner_before)

    def is_strong(self) -> bool:
        return (self.winner_after == self.truthful_order.top
                and self.winner_after != self.winner_before)

    def describe(self, alternatives: Alternatives) -> dict:
        return {
            "profile": format_profile(self.profile, alternatives),
            "voter": self.voter,
            "winner_before": alternatives.label_of(self.winner_before),
            "winner_after": alternatives.label_of(self.winner_after),
        }


@dataclass(frozen=True)
class SetReversalWitness:
    """Set-valued analogue: the compared representative strictly improves."""

    profile: Profile
    voter: int
    set_before: frozenset[int]
    set_after: frozenset[int]
    mode: str  # "optimistic" or "pessimistic"

    def describe(self, alternatives: Alternatives) -> dict:
        return {
            "profile": format_profile(self.profile, alternatives),
            "voter": self.voter,
            "set_before": alternatives.label_set(self.set_before),
            "set_after": alternatives.label_set(self.set_after),
            "mode": self.mode,
        }


@dataclass(frozen=True)
class ParticipationWitness:
    """A voter who would have done strictly better by abstaining.

    ``position`` records where the joiner sits in the joined profile;
    profiles here are voter-indexed sequences, so the join point is part
    of the event (anonymous rules ignore it, lookup tables may not).
    """

    profile_without: Profile
    joiner_order: LinearOrder
    winner_without: int
    winner_with: int
    position: int

    def joined_profile(self) -> Profile:
        return self.profile_without.insert_voter(self.position, self.joiner_order)

    def is_violation(self) -> bool:
        return self.joiner_order.prefers(self.winner_without, self.winner_with)

    def describe(self, alternatives: Alternatives) -> dict:
        return {
            "profile_without": format_profile(self.profile_without, alternatives),
            "joiner_order": format_order(self.joiner_order, alternatives),
            "position": self.position,
            "winner_without": alternatives.label_of(self.winner_without),
            "winner_with": alternatives.label_of(self.winner_with),
        }


@dataclass(frozen=True)
class ManipulationWitness:
    """A voter whose misreport strictly beats their truthful vote."""

    profile: Profile
    voter: int
    misreport: LinearOrder
    winner_truthful: int
    winner_misreport: int

    def is_violation(self) -> bool:
        truthful = self.profile.votes[self.voter]
        return truthful.prefers(self.winner_misreport, self.winner_truthful)

    def describe(self, alternatives: Alternatives) -> dict:
        return {
            "profile": format_profile(self.profile, alternatives),
            "voter": self.voter,
            "misreport": format_order(self.misreport, alternatives),
            "winner_truthful": alternatives.label_of(self.winner_truthful),
            "winner_misreport": alternatives.label_of(self.winner_misreport),
        }


# --- scan plumbing ------------------------------------------------------------


def _profile_digits(index: int, n: int, fact: int) -> list[int]:
    digits = []
    for _ in range(n):
        index, d = divmod(index, fact)
        digits.append(d)
    digits.reverse()
    return digits


class _WinnerMemo:
    """Per-scan cache of rule outcomes keyed by profile index."""

    def __init__(self, rule, n: int, m: int):
        self.rule = rule
        self.n = n
        self.m = m
        self.cache: dict[int, object] = {}

    def __call__(self, index: int):
        value = self.cache.get(index)
        if value is None:
            value = self.rule(index_to_profile(index, self.n, self.m))
            self.cache[index] = value
        return value


def _reversal_chunk(rule: Rule, n: int, m: int, strong: bool,
                    lo: int, hi: int) -> tuple | None:
    """First reversal violation with unit index in [lo, hi).

    Units are ``profile_index * n + voter``.
    """
    fact = math.factorial(m)
    orders = enumerate_orders(m)
    rev = _reverse_index_table(m)
    winner = _WinnerMemo(rule, n, m)
    for index in range(lo // n, (hi + n - 1) // n):
        digits = _profile_digits(index, n, fact)
        before = None
        for voter in range(n):
            unit = index * n + voter
            if not lo <= unit < hi:
                continue
            if before is None:
                before = winner(index)
            truthful = orders[digits[voter]]
            place = fact ** (n - 1 - voter)
            after = winner(index + (rev[digits[voter]] - digits[voter]) * place)
            if strong:
                hit = after == truthful.top and after != before
            else:
                hit = truthful.prefers(after, before)
            if hit:
                return (unit, index, voter, before, after)
    return None


def _set_reversal_chunk(set_rule: SetRule, n: int, m: int, mode: str,
                        lo: int, hi: int) -> tuple | None:
    fact = math.factorial(m)
    orders = enumerate_orders(m)
    rev = _reverse_index_table(m)
    outcome = _WinnerMemo(set_rule, n, m)

    def checked(index: int) -> frozenset[int]:
        value = outcome(index)
        if not value:
            raise EmptyOutcomeSet(f"set-valued rule returned an empty set "
                                  f"at profile index {index}")
        return value

    for index in range(lo // n, (hi + n - 1) // n):
        digits = _profile_digits(index, n, fact)
        before = None
        for voter in range(n):
            unit = index * n + voter
            if not lo <= unit < hi:
                continue
            if before is None:
                before = checked(index)
            truthful = orders[digits[voter]]
            place = fact ** (n - 1 - voter)
            after = checked(index + (rev[digits[voter]] - digits[voter]) * place)
            if mode == "optimistic":
                rep_before, rep_after = truthful.best_of(before), truthful.best_of(after)
            else:
                rep_before, rep_after = truthful.worst_of(before), truthful.worst_of(after)
            if truthful.prefers(rep_after, rep_before):
                return (unit, index, voter, before, after)
    return None


def _participation_chunk(rules_pair, n: int, m: int,
                         lo: int, hi: int) -> tuple | None:
    """Units are ``profile_index_over_n_minus_1 * m! + joiner_order_index``."""
    rule_small, rule_big = rules_pair
    fact = math.factorial(m)
    orders = enumerate_orders(m)
    small = _WinnerMemo(rule_small, n - 1, m)
    for index in range(lo // fact, (hi + fact - 1) // fact):
        base = None
        without = None
        for oix in range(fact):
            unit = index * fact + oix
            if not lo <= unit < hi:
                continue
            if base is None:
                base = index_to_profile(index, n - 1, m)
                without = small(index)
            joiner = orders[oix]
            with_joiner = rule_big(base.add_voter(joiner))
            if joiner.prefers(without, with_joiner):
                return (unit, index, oix, without, with_joiner)
    return None


def _manipulation_chunk(rule: Rule, n: int, m: int, condorcet_only: bool,
                        lo: int, hi: int) -> tuple | None:
    """Units are ``(profile_index * n + voter) * m! + misreport_order_index``."""
    from .tally import condorcet_domain_member

    fact = math.factorial(m)
    orders = enumerate_orders(m)
    winner = _WinnerMemo(rule, n, m)
    membership: dict[int, bool] = {}

    def in_domain(index: int) -> bool:
        ok = membership.get(index)
        if ok is None:
            ok = condorcet_domain_member(index_to_profile(index, n, m))
            membership[index] = ok
        return ok

    for unit in range(lo, hi):
        rest, oix = divmod(unit, fact)
        index, voter = divmod(rest, n)
        digits = _profile_digits(index, n, fact)
        if digits[voter] == oix:
            continue
        if condorcet_only and not in_domain(index):
            continue
        place = fact ** (n - 1 - voter)
        other = index + (oix - digits[voter]) * place
        if condorcet_only and not in_domain(other):
            continue
        truthful = orders[digits[voter]]
        if truthful.prefers(winner(other), winner(index)):
            return (unit, index, voter, oix, winner(index), winner(other))
    return None


def _run_scan(chunk_fn, chunk_args: tuple, total_units: int, *,
              budget: int | None, sample: int | None, seed: int,
              block_span: int, workers: int) -> tuple | None:
    """Dispatch a first-witness scan over ``total_units`` scan units.

    Exhaustive mode covers units [0, min(total, budget)) and raises
    :class:`BudgetExceeded` if that had to stop short without a witness.
    Sampled mode visits ``sample`` random blocks of ``block_span`` units
    drawn from a seeded generator.
    """
    budget = DEFAULT_BUDGET if budget is None else budget
    if sample is not None:
        rng = random.Random(seed)
        blocks = total_units // block_span
        hit = None
        for _ in range(sample):
            block = rng.randrange(blocks)
            found = chunk_fn(*chunk_args, block * block_span, (block + 1) * block_span)
            if found is not None and (hit is None or found[0] < hit[0]):
                hit = found
        return hit

    region = min(total_units, budget)
    if workers > 1 and region > workers:
        step = -(-region // workers)
        jobs = [(chunk_fn, chunk_args, lo, min(lo + step, region))
                for lo in range(0, region, step)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_chunk_runner, jobs))
        hits = [r for r in results if r is not None]
        hit = min(hits, key=lambda t: t[0]) if hits else None
    else:
        hit = chunk_fn(*chunk_args, 0, region)
    if hit is None and region < total_units:
        raise BudgetExceeded(
            f"scanned {region} of {total_units} scan units without a verdict",
            scanned=region, total=total_units)
    return hit


def _chunk_runner(packed):
    chunk_fn, chunk_args, lo, hi = packed
    return chunk_fn(*chunk_args, lo, hi)


# --- checkers ----------------------------------------------------------------


def check_halfway_monotonicity(rule: Rule, n: int, m: int, *,
                               budget: int | None = None,
                               sample: int | None = None, seed: int = 0,
                               workers: int = 1) -> ReversalWitness | None:
    """Search for a voter who gains by reversing their ranking.

    ``None`` from an exhaustive scan certifies the rule half-way monotonic
    on the whole (n, m) domain.
    """
    return _check_reversal(rule, n, m, strong=False, budget=budget,
                           sample=sample, seed=seed, workers=workers)


def check_strong_reversal(rule: Rule, n: int, m: int, *,
                          budget: int | None = None,
                          sample: int | None = None, seed: int = 0,
                          workers: int = 1) -> ReversalWitness | None:
    """Like :func:`check_halfway_monotonicity`, but the reversal must make
    the voter's truthful favourite win."""
    return _check_reversal(rule, n, m, strong=True, budget=budget,
                           sample=sample, seed=seed, workers=workers)


def _check_reversal(rule: Rule, n: int, m: int, *, strong: bool,
                    budget, sample, seed, workers) -> ReversalWitness | None:
    total = num_profiles(n, m) * n
    hit = _run_scan(_reversal_chunk, (rule, n, m, strong), total,
                    budget=budget, sample=sample, seed=seed,
                    block_span=n, workers=workers)
    if hit is None:
        return None
    _, index, voter, before, after = hit
    witness = ReversalWitness(index_to_profile(index, n, m), voter, before, after)
    _revalidate_reversal(witness, rule, strong=strong)
    return witness


def _revalidate_reversal(witness: ReversalWitness, rule: Rule, *, strong: bool) -> None:
    before = rule(witness.profile)
    after = rule(witness.profile.reverse_vote(witness.voter))
    ok = (before == witness.winner_before and after == witness.winner_after
          and witness.is_violation() and (witness.is_strong() if strong else True))
    if not ok:
        raise NotAViolation("witness failed revalidation against the rule")


def check_hwm_optimistic(set_rule: SetRule, n: int, m: int, *,
                         budget: int | None = None,
                         sample: int | None = None, seed: int = 0,
                         workers: int = 1) -> SetReversalWitness | None:
    """Half-way monotonicity when outcome sets are compared by their best
    element under the reversing voter's truthful order."""
    return _check_set_reversal(set_rule, n, m, "optimistic", budget=budget,
                               sample=sample, seed=seed, workers=workers)


def check_hwm_pessimistic(set_rule: SetRule, n: int, m: int, *,
                          budget: int | None = None,
                          sample: int | None = None, seed: int = 0,
                          workers: int = 1) -> SetReversalWitness | None:
    """As optimistic, but sets are compared by their worst element."""
    return _check_set_reversal(set_rule, n, m, "pessimistic", budget=budget,
                               sample=sample, seed=seed, workers=workers)


def _check_set_reversal(set_rule: SetRule, n: int, m: int, mode: str, *,
                        budget, sample, seed, workers) -> SetReversalWitness | None:
    total = num_profiles(n, m) * n
    hit = _run_scan(_set_reversal_chunk, (set_rule, n, m, mode), total,
                    budget=budget, sample=sample, seed=seed,
                    block_span=n, workers=workers)
    if hit is None:
        return None
    _, index, voter, before, after = hit
    return SetReversalWitness(index_to_profile(index, n, m), voter,
                              frozenset(before), frozenset(after), mode)


def family_rule(family: RuleFamily, size: int) -> Rule:
    """Resolve the rule a variable-electorate family provides for ``size``.

    Accepts a mapping from sizes to rules, a factory taking the size, or a
    single profile-to-winner callable that works at any size.
    """
    if isinstance(family, Mapping):
        try:
            return family[size]
        except KeyError:
            raise MissingSize(f"rule family has no member for n={size}") from None
    if callable(family):
        fixed = getattr(family, "n", None)  # lookup tables are single-size
        if fixed is not None and fixed != size:
            raise MissingSize(f"rule is fixed to n={fixed}, need n={size}")
        return family  # type: ignore[return-value]
    raise MissingSize(f"cannot resolve a rule for n={size}")


def check_participation(family: RuleFamily, n: int, m: int, *,
                        budget: int | None = None,
                        sample: int | None = None, seed: int = 0,
                        workers: int = 1) -> ParticipationWitness | None:
    """Search for a joiner who would have preferred to abstain, across the
    (n-1, n) electorate boundary."""
    if n <= 1:
        return None  # no outcome is defined for an empty election
    rule_small = family_rule(family, n - 1)
    rule_big = family_rule(family, n)
    fact = math.factorial(m)
    total = num_profiles(n - 1, m) * fact
    hit = _run_scan(_participation_chunk, ((rule_small, rule_big), n, m),
                    total, budget=budget, sample=sample, seed=seed,
                    block_span=fact, workers=workers)
    if hit is None:
        return None
    _, index, oix, without, with_joiner = hit
    joiner = enumerate_orders(m)[oix]
    witness = ParticipationWitness(index_to_profile(index, n - 1, m),
                                   joiner, without, with_joiner, position=n - 1)
    if not witness.is_violation() or rule_big(witness.joined_profile()) != with_joiner:
        raise NotAViolation("participation witness failed revalidation")
    return witness


def check_manipulability(rule: Rule, n: int, m: int, *,
                         domain: str = "full",
                         budget: int | None = None,
                         sample: int | None = None, seed: int = 0,
                         workers: int = 1) -> ManipulationWitness | None:
    """Search for a profitable misreport.

    With ``domain="condorcet"`` both the truthful and the misreported
    profile must admit a Condorcet winner for the pair to count.
    """
    if domain not in ("full", "condorcet"):
        raise ValueError(f"unknown domain {domain!r}")
    fact = math.factorial(m)
    total = num_profiles(n, m) * n * fact
    hit = _run_scan(_manipulation_chunk, (rule, n, m, domain == "condorcet"),
                    total, budget=budget, sample=sample, seed=seed,
                    block_span=fact, workers=workers)
    if hit is None:
        return None
    _, index, voter, oix, w_true, w_lie = hit
    witness = ManipulationWitness(index_to_profile(index, n, m), voter,
                                  enumerate_orders(m)[oix], w_true, w_lie)
    if not witness.is_violation():
        raise NotAViolation("manipulation witness failed revalidation")
    return witness


def explain_hwm_via_participation(witness: ReversalWitness,
                                  family: RuleFamily) -> ParticipationWitness:
    """Locate the no-show violation hiding inside a reversal violation.

    Reversing a vote is the same as that voter leaving and the reversed
    voter joining at the same position.  If the family satisfied
    participation at the (n-1, n) boundary, chaining the two join steps
    through f(P minus the voter) would contradict the reversal witness, so
    one of the two links must fail; the first failing link is returned as
    a participation witness (its join position is the reversing voter's).
    """
    n = witness.profile.n
    rule_big = family_rule(family, n)
    if n < 2:
        raise NotAViolation("a reversal witness needs at least 2 voters to explain")
    rule_small = family_rule(family, n - 1)

    before = rule_big(witness.profile)
    reversed_profile = witness.profile.reverse_vote(witness.voter)
    after = rule_big(reversed_profile)
    if (before != witness.winner_before or after != witness.winner_after
            or not witness.is_violation()):
        raise NotAViolation("reversal witness failed revalidation")

    truthful = witness.truthful_order
    without_profile = witness.profile.remove_voter(witness.voter)
    middle = rule_small(without_profile)

    # link 1: the truthful voter joining must not hurt them
    if truthful.prefers(middle, before):
        return ParticipationWitness(without_profile, truthful, middle, before,
                                    position=witness.voter)
    # link 2: the reversed voter joining must not hurt the reversed order
    reversed_order = truthful.reverse()
    if reversed_order.prefers(middle, after):
        return ParticipationWitness(without_profile, reversed_order, middle,
                                    after, position=witness.voter)
    # both links holding would chain into before >= after, contradicting
    # the revalidated witness
    raise AssertionError("unreachable: a valid reversal witness breaks a link")
