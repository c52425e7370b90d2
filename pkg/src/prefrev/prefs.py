"""Alternatives, linear orders, profiles, and the canonical enumerations.

Alternatives are plain integer ids ``0..m-1``; :class:`Alternatives` maps
them to display labels.  A :class:`LinearOrder` is a strict ranking (best
first) and a :class:`Profile` is a voter-indexed sequence of orders.  All
values are immutable; every operation returns a new value.

The canonical enumeration of the m! orders is lexicographic by alternative
id, with index 0 the identity order ``0>1>...>m-1``.  Profile indices use
voter 0 as the most significant digit in base m!.  Both are fixed so that
CNF variable ids and golden files are stable across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product
from typing import Iterable, Iterator, TextIO

from .errors import (
    DuplicateLabel,
    IndexOutOfRange,
    MissingAlternative,
    MTooLarge,
    PrefRevError,
    UnknownLabel,
    VoterOutOfRange,
)

MAX_ENUMERABLE_M = 8


def default_labels(m: int) -> tuple[str, ...]:
    """Display labels a,b,c,d then x1,x2,... for any extra alternatives."""
    base = ("a", "b", "c", "d")
    if m <= 4:
        return base[:m]
    return base + tuple(f"x{i}" for i in range(1, m - 3))


@dataclass(frozen=True, slots=True)
class Alternatives:
    """The label context for one election: id ``i`` displays as ``labels[i]``."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.labels)) != len(self.labels):
            raise DuplicateLabel(next(x for x in self.labels
                                      if self.labels.count(x) > 1))

    @classmethod
    def default(cls, m: int) -> "Alternatives":
        return cls(default_labels(m))

    @property
    def m(self) -> int:
        return len(self.labels)

    def id_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(label) from None

    def label_of(self, alt: int) -> str:
        return self.labels[alt]

    def label_set(self, alts: Iterable[int]) -> str:
        inner = ",".join(self.labels[a] for a in sorted(alts))
        return "{" + inner + "}"


@dataclass(frozen=True, slots=True)
class LinearOrder:
    """A strict ranking of the m alternatives, best first."""

    ranking: tuple[int, ...]

    def __post_init__(self) -> None:
        m = len(self.ranking)
        if sorted(self.ranking) != list(range(m)):
            raise PrefRevError(f"not a permutation of 0..{m - 1}: {self.ranking}")

    @property
    def m(self) -> int:
        return len(self.ranking)

    @property
    def top(self) -> int:
        return self.ranking[0]

    @property
    def bottom(self) -> int:
        return self.ranking[-1]

    def position_of(self, alt: int) -> int:
        """Rank of ``alt``: 0 is best."""
        return self.positions()[alt]

    def positions(self) -> tuple[int, ...]:
        return _positions_of(self.ranking)

    def prefers(self, a: int, b: int) -> bool:
        """True iff this order ranks ``a`` strictly above ``b``."""
        pos = self.positions()
        return pos[a] < pos[b]

    def best_of(self, alts: Iterable[int]) -> int:
        pos = self.positions()
        return min(alts, key=pos.__getitem__)

    def worst_of(self, alts: Iterable[int]) -> int:
        pos = self.positions()
        return max(alts, key=pos.__getitem__)

    def reverse(self) -> "LinearOrder":
        return LinearOrder(self.ranking[::-1])


@lru_cache(maxsize=None)
def _positions_of(ranking: tuple[int, ...]) -> tuple[int, ...]:
    pos = [0] * len(ranking)
    for i, a in enumerate(ranking):
        pos[a] = i
    return tuple(pos)


def reverse(order: LinearOrder) -> LinearOrder:
    """The reversal of a ranking: a above b becomes b above a."""
    return order.reverse()


@lru_cache(maxsize=None)
def enumerate_orders(m: int) -> tuple[LinearOrder, ...]:
    """All m! linear orders over 0..m-1 in lexicographic order by id.

    Index 0 is the identity order; the sequence is stable across runs.
    """
    if not 1 <= m <= MAX_ENUMERABLE_M:
        raise MTooLarge(f"m={m} outside enumerable range 1..{MAX_ENUMERABLE_M}")
    return tuple(LinearOrder(p) for p in permutations(range(m)))


@lru_cache(maxsize=None)
def _order_index_map(m: int) -> dict[tuple[int, ...], int]:
    return {o.ranking: i for i, o in enumerate(enumerate_orders(m))}


def order_index(order: LinearOrder) -> int:
    """Position of ``order`` in :func:`enumerate_orders` of the same m."""
    return _order_index_map(order.m)[order.ranking]


@lru_cache(maxsize=None)
def _reverse_index_table(m: int) -> tuple[int, ...]:
    # reverse() expressed on canonical order indices, for scan hot loops
    idx = _order_index_map(m)
    return tuple(idx[o.ranking[::-1]] for o in enumerate_orders(m))


@dataclass(frozen=True, slots=True)
class Profile:
    """An ordered assignment of one linear order per voter."""

    votes: tuple[LinearOrder, ...]

    def __post_init__(self) -> None:
        if not self.votes:
            raise PrefRevError("a profile needs at least one voter")
        m = self.votes[0].m
        if any(v.m != m for v in self.votes):
            raise PrefRevError("all voters must rank the same alternatives")

    @property
    def n(self) -> int:
        return len(self.votes)

    @property
    def m(self) -> int:
        return self.votes[0].m

    def vote(self, i: int) -> LinearOrder:
        self._check_voter(i)
        return self.votes[i]

    def _check_voter(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise VoterOutOfRange(f"voter {i} not in 0..{self.n - 1}")

    def replace_vote(self, i: int, order: LinearOrder) -> "Profile":
        self._check_voter(i)
        votes = list(self.votes)
        votes[i] = order
        return Profile(tuple(votes))

    def reverse_vote(self, i: int) -> "Profile":
        """The profile where voter ``i`` submits the reverse of their vote."""
        return self.replace_vote(i, self.votes[i].reverse())

    def remove_voter(self, i: int) -> "Profile":
        self._check_voter(i)
        if self.n == 1:
            raise VoterOutOfRange("cannot remove the last voter")
        return Profile(self.votes[:i] + self.votes[i + 1:])

    def add_voter(self, order: LinearOrder) -> "Profile":
        return Profile(self.votes + (order,))

    def insert_voter(self, i: int, order: LinearOrder) -> "Profile":
        """Join at position ``i`` (``i == n`` appends); later voters shift."""
        if not 0 <= i <= self.n:
            raise VoterOutOfRange(f"insert position {i} not in 0..{self.n}")
        return Profile(self.votes[:i] + (order,) + self.votes[i:])

    def pad(self, order: LinearOrder) -> "Profile":
        """Append ``order`` and its reverse; majority margins are unchanged."""
        return Profile(self.votes + (order, order.reverse()))


def replace_vote(profile: Profile, i: int, order: LinearOrder) -> Profile:
    return profile.replace_vote(i, order)


def remove_voter(profile: Profile, i: int) -> Profile:
    return profile.remove_voter(i)


def add_voter(profile: Profile, order: LinearOrder) -> Profile:
    return profile.add_voter(order)


def pad_profile(profile: Profile, order: LinearOrder) -> Profile:
    return profile.pad(order)


# --- canonical profile indexing -------------------------------------------


def num_profiles(n: int, m: int) -> int:
    return math.factorial(m) ** n


def profile_to_index(profile: Profile) -> int:
    """Canonical index: voter 0 is the most significant base-m! digit."""
    fact = math.factorial(profile.m)
    value = 0
    for vote in profile.votes:
        value = value * fact + order_index(vote)
    return value


def index_to_profile(index: int, n: int, m: int) -> Profile:
    if not 0 <= index < num_profiles(n, m):
        raise IndexOutOfRange(f"profile index {index} not in 0..{num_profiles(n, m) - 1}")
    fact = math.factorial(m)
    orders = enumerate_orders(m)
    digits = []
    for _ in range(n):
        index, d = divmod(index, fact)
        digits.append(d)
    return Profile(tuple(orders[d] for d in reversed(digits)))


def iter_profiles(n: int, m: int) -> Iterator[Profile]:
    """All (m!)^n profiles in canonical index order."""
    orders = enumerate_orders(m)
    # product varies the last position fastest, matching voter 0 as the
    # most significant digit
    for combo in product(range(len(orders)), repeat=n):
        yield Profile(tuple(orders[d] for d in combo))


# --- text formats -----------------------------------------------------------


def parse_order(text: str, alternatives: Alternatives) -> LinearOrder:
    """Parse ``a>b>c>d`` (whitespace tolerated) into a linear order."""
    labels = [part.strip() for part in text.split(">")]
    seen: set[int] = set()
    ranking = []
    for label in labels:
        alt = alternatives.id_of(label)
        if alt in seen:
            raise DuplicateLabel(label)
        seen.add(alt)
        ranking.append(alt)
    for alt in range(alternatives.m):
        if alt not in seen:
            raise MissingAlternative(alternatives.label_of(alt))
    return LinearOrder(tuple(ranking))


def format_order(order: LinearOrder, alternatives: Alternatives) -> str:
    return ">".join(alternatives.label_of(a) for a in order.ranking)


def parse_profile(text: str, *, source: str = "<string>") -> tuple[Profile, Alternatives]:
    """Parse the profile text format.

    One optional ``# comment`` per line; a header ``m=<int> labels=a,b,...``;
    then ``<count>: <order>`` lines whose counts expand left to right into
    voter positions.
    """
    alternatives: Alternatives | None = None
    votes: list[LinearOrder] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if alternatives is None:
            alternatives = _parse_profile_header(line, source, lineno)
            continue
        if ":" not in line:
            raise PrefRevError(f"{source}:{lineno}: expected '<count>: <order>', got {raw!r}")
        count_part, order_part = line.split(":", 1)
        try:
            count = int(count_part)
        except ValueError:
            raise PrefRevError(f"{source}:{lineno}: bad count {count_part!r}") from None
        if count < 1:
            raise PrefRevError(f"{source}:{lineno}: count must be positive")
        try:
            order = parse_order(order_part, alternatives)
        except PrefRevError as exc:
            raise type(exc)(f"{source}:{lineno}: {exc}") from None
        votes.extend([order] * count)
    if alternatives is None:
        raise PrefRevError(f"{source}: missing 'm=... labels=...' header")
    if not votes:
        raise PrefRevError(f"{source}: profile has no voters")
    return Profile(tuple(votes)), alternatives


def _parse_profile_header(line: str, source: str, lineno: int) -> Alternatives:
    fields = dict(part.split("=", 1) for part in line.split() if "=" in part)
    if "m" not in fields or "labels" not in fields:
        raise PrefRevError(f"{source}:{lineno}: header must be 'm=<int> labels=...'")
    m = int(fields["m"])
    labels = tuple(x.strip() for x in fields["labels"].split(","))
    if len(labels) != m:
        raise PrefRevError(f"{source}:{lineno}: m={m} but {len(labels)} labels given")
    return Alternatives(labels)


def format_profile(profile: Profile, alternatives: Alternatives) -> str:
    """Render a profile in the text format, grouping equal consecutive votes."""
    lines = [f"m={profile.m} labels={','.join(alternatives.labels)}"]
    run_order = profile.votes[0]
    run_len = 0
    for vote in profile.votes:
        if vote == run_order:
            run_len += 1
        else:
            lines.append(f"{run_len}: {format_order(run_order, alternatives)}")
            run_order, run_len = vote, 1
    lines.append(f"{run_len}: {format_order(run_order, alternatives)}")
    return "\n".join(lines) + "\n"


def read_profile(path_or_file: str | TextIO) -> tuple[Profile, Alternatives]:
    if hasattr(path_or_file, "read"):
        return parse_profile(path_or_file.read())
    with open(path_or_file, encoding="utf-8") as handle:
        return parse_profile(handle.read(), source=str(path_or_file))


def write_profile(profile: Profile, alternatives: Alternatives, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(format_profile(profile, alternatives))
