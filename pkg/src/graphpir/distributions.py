"""Exact query distributions backed by integer outcome counts.

Every enumeration in this package walks a finite uniform sample space and
tallies integer counts per canonical query encoding, so probabilities are
exact rationals by construction; no floating point enters any privacy
verdict. The reserved encoding for the empty query is ``"null"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

NULL_ENCODING = "null"


@dataclass(frozen=True)
class ExactDistribution:
    """Distribution of one server's query: counts over a uniform sample space."""

    server: int
    theta: object
    counts: Mapping[str, int]
    total: int

    def __post_init__(self):
        if self.total <= 0:
            raise ValueError("total outcome count must be positive")
        cleaned = {enc: c for enc, c in self.counts.items() if c != 0}
        if any(c < 0 for c in cleaned.values()):
            raise ValueError("negative outcome count")
        if sum(cleaned.values()) != self.total:
            raise ValueError("counts do not sum to the sample-space size")
        object.__setattr__(self, "counts", cleaned)

    def prob(self, encoding: str) -> Fraction:
        return Fraction(self.counts.get(encoding, 0), self.total)

    def null_prob(self) -> Fraction:
        return self.prob(NULL_ENCODING)

    def support(self) -> frozenset[str]:
        return frozenset(self.counts)

    def as_fractions(self) -> dict[str, Fraction]:
        return {enc: Fraction(c, self.total) for enc, c in self.counts.items()}


def tv_distance(a: ExactDistribution, b: ExactDistribution) -> Fraction:
    """Total variation distance, exact: half the L1 gap between the two."""
    if a.total == b.total:
        gap = sum(
            abs(a.counts.get(enc, 0) - b.counts.get(enc, 0))
            for enc in a.support() | b.support()
        )
        return Fraction(gap, 2 * a.total)
    gap = Fraction(0)
    for enc in a.support() | b.support():
        gap += abs(a.prob(enc) - b.prob(enc))
    return gap / 2


@dataclass(frozen=True)
class AuditReport:
    """Outcome of a privacy audit.

    Exact mode: ``max_tv`` maps server id to the largest total-variation
    distance seen across any pair of desired-file indices; the audit passes
    iff every entry is exactly zero. Statistical mode: ``p_values`` maps
    server id to a chi-square two-sample p-value; the audit passes iff no
    p-value falls below the significance level (evidence, not proof).
    """

    mode: str
    passed: bool
    max_tv: dict[int, Fraction] = field(default_factory=dict)
    p_values: dict[int, float] = field(default_factory=dict)
    significance: float | None = None
    trials: int | None = None


@dataclass(frozen=True)
class UniformityReport:
    """Per-bit marginals and downstream/upstream independence check."""

    ok: bool
    marginals: dict[tuple[int, int], Fraction]
    factorization_ok: dict[int, bool]
