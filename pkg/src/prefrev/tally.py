"""Pairwise majority arithmetic: margin matrices and Condorcet winners."""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import lru_cache

from .prefs import Alternatives, LinearOrder, Profile, enumerate_orders, order_index


@dataclass(frozen=True, slots=True)
class MarginMatrix:
    """Skew-symmetric matrix of pairwise majority margins.

    ``margin(a, b)`` is the number of voters ranking a above b minus the
    number ranking b above a; every entry has the parity of n.
    """

    m: int
    n: int
    rows: tuple[tuple[int, ...], ...]

    def margin(self, a: int, b: int) -> int:
        return self.rows[a][b]

    def beats(self, a: int, b: int) -> bool:
        return self.rows[a][b] > 0

    def key(self) -> str:
        """Row-major string key with ``_`` separators, used by C2 tables."""
        return "_".join(str(x) for row in self.rows for x in row)

    @classmethod
    def from_key(cls, key: str, *, m: int, n: int) -> "MarginMatrix":
        flat = [int(x) for x in key.split("_")]
        if len(flat) != m * m:
            raise ValueError(f"margin key has {len(flat)} entries, expected {m * m}")
        rows = tuple(tuple(flat[r * m:(r + 1) * m]) for r in range(m))
        return cls(m=m, n=n, rows=rows)

    def to_csv(self, alternatives: Alternatives) -> str:
        out = io.StringIO()
        out.write("," + ",".join(alternatives.labels) + "\n")
        for a in range(self.m):
            out.write(alternatives.label_of(a) + ","
                      + ",".join(str(self.rows[a][b]) for b in range(self.m)) + "\n")
        return out.getvalue()


@lru_cache(maxsize=None)
def _comparison_matrix(m: int, order_ix: int) -> tuple[tuple[int, ...], ...]:
    # entry (a, b) is +1 if the order ranks a above b, -1 below, 0 on diagonal
    order = enumerate_orders(m)[order_ix]
    pos = order.positions()
    return tuple(
        tuple(0 if a == b else (1 if pos[a] < pos[b] else -1) for b in range(m))
        for a in range(m)
    )


def margin_matrix(profile: Profile) -> MarginMatrix:
    m = profile.m
    totals = [[0] * m for _ in range(m)]
    for vote in profile.votes:
        cmp = _comparison_matrix(m, order_index(vote))
        for a in range(m):
            row = cmp[a]
            trow = totals[a]
            for b in range(m):
                trow[b] += row[b]
    return MarginMatrix(m=m, n=profile.n, rows=tuple(tuple(r) for r in totals))


def condorcet_winner(profile_or_margins: Profile | MarginMatrix) -> int | None:
    """The alternative beating every other by a strict majority, if any.

    On even electorates strict positivity means a margin of at least 2,
    by parity.
    """
    margins = (profile_or_margins if isinstance(profile_or_margins, MarginMatrix)
               else margin_matrix(profile_or_margins))
    for a in range(margins.m):
        if all(margins.rows[a][b] > 0 for b in range(margins.m) if b != a):
            return a
    return None


def condorcet_domain_member(profile: Profile) -> bool:
    """True iff the profile admits a Condorcet winner."""
    return condorcet_winner(profile) is not None


def reversal_margin_delta(vote: LinearOrder, a: int, b: int) -> int:
    """Change to margin(a, b) when a voter with this vote reverses it."""
    if a == b:
        return 0
    return -2 if vote.prefers(a, b) else 2
