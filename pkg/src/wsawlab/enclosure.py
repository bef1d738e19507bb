"""Certified intervals for truncated walk sums.

An Enclosure [lower, upper] brackets an (often infinite) nonnegative walk
sum: lower is the enumerated partial sum, upper adds the pruned-branch
budget and a geometric tail bound for walks longer than the cutoff.  When
no convergent tail bound exists the upper end is +inf and rigorous=False;
the lower end is then still a valid partial sum.

The arithmetic here is plain outward combination of endpoints (no directed
rounding); enclosures are rigorous up to floating-point roundoff of
compensated sums, which the test tolerances account for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Enclosure:
    lower: float
    upper: float
    truncation_N: int
    rigorous: bool

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"inverted enclosure [{self.lower}, {self.upper}]")

    def width(self) -> float:
        return self.upper - self.lower

    def contains_value(self, v: float) -> bool:
        return self.lower <= v <= self.upper

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "truncation_N": self.truncation_N,
            "rigorous": self.rigorous,
        }


def exact(v: float, n: int = 0) -> Enclosure:
    return Enclosure(v, v, n, True)


def _combine_meta(*es: Enclosure) -> tuple[int, bool]:
    return min(e.truncation_N for e in es), all(e.rigorous for e in es)


def add(a: Enclosure, b: Enclosure) -> Enclosure:
    n, rig = _combine_meta(a, b)
    return Enclosure(a.lower + b.lower, a.upper + b.upper, n, rig)


def add_many(es) -> Enclosure:
    es = list(es)
    if not es:
        return exact(0.0)
    lo = math.fsum(e.lower for e in es)
    hi = math.fsum(e.upper for e in es)
    if any(math.isinf(e.upper) for e in es):
        hi = math.inf
    n, rig = _combine_meta(*es)
    return Enclosure(lo, hi, n, rig)


def sub(a: Enclosure, b: Enclosure) -> Enclosure:
    """a - b; lower end uses b's upper, so it stays a valid bracket."""
    n, rig = _combine_meta(a, b)
    lo = -math.inf if math.isinf(b.upper) else a.lower - b.upper
    return Enclosure(lo, a.upper - b.lower, n, rig)


def scale(a: Enclosure, c: float) -> Enclosure:
    if c < 0:
        raise ValueError("scale factor must be nonnegative")
    if c == 0.0:
        return Enclosure(0.0, 0.0, a.truncation_N, a.rigorous)
    return Enclosure(c * a.lower, c * a.upper, a.truncation_N, a.rigorous)


def mul(a: Enclosure, b: Enclosure) -> Enclosure:
    """Product of enclosures of nonnegative quantities."""
    if a.lower < 0 or b.lower < 0:
        raise ValueError("mul expects nonnegative enclosures")
    n, rig = _combine_meta(a, b)
    hi = math.inf if math.isinf(a.upper) or math.isinf(b.upper) else a.upper * b.upper
    return Enclosure(a.lower * b.lower, hi, n, rig)


def pow_int(a: Enclosure, k: int) -> Enclosure:
    """a^k for a nonnegative enclosure, k >= 0."""
    if a.lower < 0:
        raise ValueError("pow_int expects a nonnegative enclosure")
    if k < 0:
        raise ValueError("exponent must be >= 0")
    if k == 0:
        return exact(1.0, a.truncation_N)
    return Enclosure(a.lower**k, a.upper**k, a.truncation_N, a.rigorous)


def max_of(es) -> Enclosure:
    """Enclosure of max over a finite family."""
    es = list(es)
    if not es:
        raise ValueError("max_of needs at least one enclosure")
    n, rig = _combine_meta(*es)
    return Enclosure(max(e.lower for e in es), max(e.upper for e in es), n, rig)
