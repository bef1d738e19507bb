"""Finite lattice walks and their self-intersection weight.

A walk gamma = (gamma(0), ..., gamma(n)) carries the weight

    rho(gamma) = prod_{0 <= s < t <= n} (1 - lam * 1[gamma(s) = gamma(t)])
               = prod_{p} (1 - lam)^C(m_p, 2),

where m_p is the number of visits to site p.  lam = 0 gives the simple
random walk (rho = 1), lam = 1 kills every self-intersecting walk.

The occupancy table makes rho updates O(1) per extension, which is what
the enumeration hot path needs.  rho accepts Fraction lam for an exact
rational mode used by the bracketing tests.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lattice import Point, are_adjacent, neighbors


@dataclass(frozen=True)
class ModelParams:
    """The (d, lam, beta) triple every quantity is parameterized by."""

    d: int
    lam: float
    beta: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must lie in [0, 1]")
        if self.beta < 0.0:
            raise ValueError("beta must be >= 0")


class Walk:
    """A nearest-neighbor path with an incremental occupancy table.

    Mutable only through extend/pop; intended to be owned by a single
    enumeration task and shared across tasks by copy.
    """

    __slots__ = ("sites", "occupancy", "_pair_count")

    def __init__(self, start: Point):
        self.sites: list[Point] = [start]
        self.occupancy: dict[Point, int] = {start: 1}
        # running sum of C(m_p, 2) over sites, so rho = (1-lam)^_pair_count
        self._pair_count = 0

    @classmethod
    def from_sites(cls, sites) -> "Walk":
        sites = [tuple(s) for s in sites]
        if not sites:
            raise ValueError("a walk has at least one site")
        w = cls(sites[0])
        for p in sites[1:]:
            w.extend(p)
        return w

    def __len__(self) -> int:
        """Number of edges; the zero-length walk is valid."""
        return len(self.sites) - 1

    def start(self) -> Point:
        return self.sites[0]

    def end(self) -> Point:
        return self.sites[-1]

    def extend(self, p: Point) -> None:
        if not are_adjacent(self.sites[-1], p):
            raise ValueError(f"{p} is not adjacent to walk end {self.sites[-1]}")
        prior = self.occupancy.get(p, 0)
        self._pair_count += prior
        self.occupancy[p] = prior + 1
        self.sites.append(p)

    def pop(self) -> Point:
        if len(self.sites) == 1:
            raise ValueError("cannot pop the starting site")
        p = self.sites.pop()
        m = self.occupancy[p] - 1
        self._pair_count -= m
        if m:
            self.occupancy[p] = m
        else:
            del self.occupancy[p]
        return p

    def copy(self) -> "Walk":
        w = Walk.__new__(Walk)
        w.sites = list(self.sites)
        w.occupancy = dict(self.occupancy)
        w._pair_count = self._pair_count
        return w

    def reversed(self) -> "Walk":
        return Walk.from_sites(self.sites[::-1])

    def pair_count(self) -> int:
        return self._pair_count

    def to_json(self) -> list[list[int]]:
        return [list(p) for p in self.sites]

    @classmethod
    def from_json(cls, data) -> "Walk":
        return cls.from_sites(tuple(p) for p in data)

    def __repr__(self):
        return f"Walk({self.sites})"


def rho(walk: Walk, lam) -> float:
    """Self-intersection weight of the walk; exact if lam is a Fraction."""
    return (1 - lam) ** walk.pair_count()


def extend_factor(walk: Walk, nxt: Point, lam) -> float:
    """Factor f with rho(walk + nxt) = rho(walk) * f.

    Equals (1 - lam)^k where k is the current occupancy of nxt.
    """
    if not are_adjacent(walk.end(), nxt):
        raise ValueError(f"{nxt} is not adjacent to walk end {walk.end()}")
    return (1 - lam) ** walk.occupancy.get(nxt, 0)


def concat(w1: Walk, edge: tuple[Point, Point], w2: Walk) -> Walk:
    """The concatenation w1 o (y z) o w2."""
    y, z = edge
    if w1.end() != y:
        raise ValueError("w1 must end at the edge's first endpoint")
    if w2.start() != z:
        raise ValueError("w2 must start at the edge's second endpoint")
    if not are_adjacent(y, z):
        raise ValueError("edge endpoints are not adjacent")
    return Walk.from_sites(w1.sites + w2.sites)


def cross_pair_count(w1: Walk, w2: Walk) -> int:
    """Number of index pairs (i, j) with w1(i) = w2(j), j >= 1."""
    count = 0
    first = w2.sites[0]
    for p, m2 in w2.occupancy.items():
        m1 = w1.occupancy.get(p, 0)
        if not m1:
            continue
        if p == first:
            m2 -= 1
        count += m1 * m2
    return count


def split_weight_bounds(
    w1: Walk, edge: tuple[Point, Point], w2: Walk, lam
) -> tuple[float, float]:
    """Bracket for the weight of the concatenation w1 o (y z) o w2.

    Returns (rho1*rho2*(1 - lam*I), rho1*rho2) with
    I = #{(i, j): w1(i) = w2(j), 0 <= i <= |w1|, 1 <= j <= |w2|}.
    The lower bound may be negative.

    The bracket is guaranteed when z does not lie on w1 (as in the
    exit-edge decomposition, where w1 stays inside a set that excludes z);
    otherwise the (i, 0) coincidences are unaccounted for.
    """
    y, z = edge
    if w1.end() != y:
        raise ValueError("w1 must end at the edge's first endpoint")
    if w2.start() != z:
        raise ValueError("w2 must start at the edge's second endpoint")
    if not are_adjacent(y, z):
        raise ValueError("edge endpoints are not adjacent")
    prod = rho(w1, lam) * rho(w2, lam)
    interactions = cross_pair_count(w1, w2)
    return prod * (1 - lam * interactions), prod


def random_walk(start: Point, length: int, rng) -> Walk:
    """A uniform-step walk of the given length (rng is a random.Random)."""
    w = Walk(start)
    for _ in range(length):
        w.extend(rng.choice(neighbors(w.end())))
    return w
