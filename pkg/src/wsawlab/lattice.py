"""Geometry of Z^d: points, nearest-neighbor adjacency, and domain shapes.

Points are plain integer tuples.  Domains are immutable predicates over
Z^d (boxes, half-spaces, positive boxes, blocks, explicit finite sets, and
intersections).  Infinite domains are never materialized: callers bound
every walk-sum query by a length cutoff, and a length-N walk started at x
lives inside the box of radius N around x.

Conventions used throughout the package:

* the norm |x| is the sup norm max_j |x_j|;
* neighbors of a point are listed in the fixed canonical order
  (+e1, -e1, +e2, -e2, ..., +ed, -ed), which downstream code relies on
  for deterministic reductions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

Point = tuple[int, ...]


def origin(d: int) -> Point:
    return (0,) * d


def unit(d: int, axis: int, sign: int = 1) -> Point:
    e = [0] * d
    e[axis] = sign
    return tuple(e)


def sup_norm(p: Point) -> int:
    return max(abs(c) for c in p)


def add(p: Point, q: Point) -> Point:
    return tuple(a + b for a, b in zip(p, q))


def neighbor_offsets(d: int) -> list[Point]:
    """The 2d unit steps in canonical order (+e1, -e1, +e2, -e2, ...)."""
    out = []
    for axis in range(d):
        out.append(unit(d, axis, +1))
        out.append(unit(d, axis, -1))
    return out


def neighbors(p: Point) -> list[Point]:
    """The 2d lattice neighbors of p, in canonical order."""
    return [add(p, off) for off in neighbor_offsets(len(p))]


def are_adjacent(p: Point, q: Point) -> bool:
    return sum(abs(a - b) for a, b in zip(p, q)) == 1


class DimensionMismatch(ValueError):
    pass


def _check_dim(domain_d: int, p: Point) -> None:
    if len(p) != domain_d:
        raise DimensionMismatch(
            f"point of dimension {len(p)} queried against domain of dimension {domain_d}"
        )


@dataclass(frozen=True)
class Box:
    """All x with |x - center| <= radius (a box of side 2*radius+1)."""

    d: int
    center: Point
    radius: int

    def __post_init__(self):
        if len(self.center) != self.d:
            raise DimensionMismatch("box center has wrong dimension")
        if self.radius < 0:
            raise ValueError("box radius must be >= 0")

    def contains(self, p: Point) -> bool:
        _check_dim(self.d, p)
        return all(abs(a - c) <= self.radius for a, c in zip(p, self.center))

    def mask(self, pts: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center)
        return np.max(np.abs(pts - c), axis=1) <= self.radius

    def size(self) -> int:
        return (2 * self.radius + 1) ** self.d


@dataclass(frozen=True)
class HalfSpace:
    """All x with x_1 >= -n (the half-space shifted n steps to the left)."""

    d: int
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("half-space shift must be >= 0")

    def contains(self, p: Point) -> bool:
        _check_dim(self.d, p)
        return p[0] >= -self.n

    def mask(self, pts: np.ndarray) -> np.ndarray:
        return pts[:, 0] >= -self.n

    def size(self):
        return None


@dataclass(frozen=True)
class PositiveBox:
    """All x in the radius-n box with x_1 > 0."""

    d: int
    radius: int

    def contains(self, p: Point) -> bool:
        _check_dim(self.d, p)
        return p[0] > 0 and all(abs(a) <= self.radius for a in p)

    def mask(self, pts: np.ndarray) -> np.ndarray:
        return (pts[:, 0] > 0) & (np.max(np.abs(pts), axis=1) <= self.radius)

    def size(self) -> int:
        return self.radius * (2 * self.radius + 1) ** (self.d - 1)


@dataclass(frozen=True)
class Block:
    """Product of integer intervals [lo_i, hi_i] with lo_i <= 0 <= hi_i."""

    d: int
    lo: Point
    hi: Point

    def __post_init__(self):
        if len(self.lo) != self.d or len(self.hi) != self.d:
            raise DimensionMismatch("block corners have wrong dimension")
        for a, b in zip(self.lo, self.hi):
            if not (a <= 0 <= b):
                raise ValueError("block must satisfy lo_i <= 0 <= hi_i componentwise")

    def contains(self, p: Point) -> bool:
        _check_dim(self.d, p)
        return all(a <= x <= b for x, a, b in zip(p, self.lo, self.hi))

    def mask(self, pts: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def size(self) -> int:
        out = 1
        for a, b in zip(self.lo, self.hi):
            out *= b - a + 1
        return out


@dataclass(frozen=True)
class Explicit:
    """An explicit finite point set."""

    d: int
    points: frozenset

    def __post_init__(self):
        for p in self.points:
            if len(p) != self.d:
                raise DimensionMismatch("explicit point has wrong dimension")

    def contains(self, p: Point) -> bool:
        _check_dim(self.d, p)
        return p in self.points

    def mask(self, pts: np.ndarray) -> np.ndarray:
        return np.fromiter(
            (tuple(row) in self.points for row in pts), dtype=bool, count=len(pts)
        )

    def size(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class Intersection:
    """Intersection of a list of domains."""

    d: int
    parts: tuple

    def __post_init__(self):
        for s in self.parts:
            if s.d != self.d:
                raise DimensionMismatch("intersection parts have mixed dimensions")

    def contains(self, p: Point) -> bool:
        _check_dim(self.d, p)
        return all(s.contains(p) for s in self.parts)

    def mask(self, pts: np.ndarray) -> np.ndarray:
        out = np.ones(len(pts), dtype=bool)
        for s in self.parts:
            out &= s.mask(pts)
        return out

    def size(self):
        # Exact count of an intersection is not tracked; callers that need
        # finiteness use an explicit bounding box.
        return None


Domain = Box | HalfSpace | PositiveBox | Block | Explicit | Intersection


def full_box(d: int, radius: int) -> Box:
    """The box Lambda_radius centered at the origin."""
    return Box(d, origin(d), radius)


def singleton(p: Point) -> Explicit:
    return Explicit(len(p), frozenset([p]))


def iter_points(domain: Domain, bound: Box | None = None):
    """Iterate the points of a domain in lexicographic order.

    Infinite domains require an explicit bounding box.
    """
    if bound is None:
        if domain.size() is None:
            raise ValueError("infinite domain requires an explicit bounding box")
        if isinstance(domain, Explicit):
            yield from sorted(domain.points)
            return
        if isinstance(domain, Box):
            lo = [c - domain.radius for c in domain.center]
            hi = [c + domain.radius for c in domain.center]
        elif isinstance(domain, PositiveBox):
            lo = [1] + [-domain.radius] * (domain.d - 1)
            hi = [domain.radius] * domain.d
        elif isinstance(domain, Block):
            lo, hi = list(domain.lo), list(domain.hi)
        else:  # pragma: no cover - all finite kinds handled above
            raise TypeError(f"cannot iterate {type(domain).__name__}")
        yield from itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi)))
        return
    for p in iter_points(bound):
        if domain.contains(p):
            yield p


def exit_edges(
    domain: Domain, within: Domain, bound: Box | None = None
) -> list[tuple[Point, Point]]:
    """Ordered pairs (y, z) with y in S, z in within \\ S, y ~ z.

    Each edge appears exactly once.  The order is deterministic:
    lexicographic in y, canonical neighbor order in z.  For an infinite S
    an explicit bounding box restricting the y candidates is required.
    """
    edges = []
    for y in iter_points(domain, bound=bound):
        for z in neighbors(y):
            if not domain.contains(z) and within.contains(z):
                edges.append((y, z))
    return edges


def boundary_multiplicities(
    domain: Domain, bound: Box | None = None
) -> dict[Point, int]:
    """For each y in S with a neighbor outside S, the number of exit edges
    (y, z) with z anywhere in Z^d \\ S."""
    out: dict[Point, int] = {}
    for y in iter_points(domain, bound=bound):
        m = sum(1 for z in neighbors(y) if not domain.contains(z))
        if m:
            out[y] = m
    return out


def parse_point(text: str, d: int) -> Point:
    """Parse "1,0,-2"; the bare scalar "0" is shorthand for the origin."""
    text = text.strip()
    if text == "0":
        return origin(d)
    coords = tuple(int(tok) for tok in text.split(","))
    if len(coords) != d:
        raise ValueError(f"point {text!r} has {len(coords)} coordinates, expected {d}")
    return coords


def parse_domain(spec: str, d: int) -> Domain:
    """Parse the textual domain syntax used by the CLI.

    Supported forms: box:<center>:<radius>, halfspace:<n>, posbox:<radius>,
    block:<lo>:<hi>, explicit:<p1>;<p2>;...
    """
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "box":
        center_txt, _, radius_txt = rest.rpartition(":")
        if not center_txt:
            raise ValueError(f"box spec {spec!r} needs center and radius")
        return Box(d, parse_point(center_txt, d), int(radius_txt))
    if kind == "halfspace":
        return HalfSpace(d, int(rest))
    if kind == "posbox":
        return PositiveBox(d, int(rest))
    if kind == "block":
        lo_txt, _, hi_txt = rest.partition(":")
        return Block(d, parse_point(lo_txt, d), parse_point(hi_txt, d))
    if kind == "explicit":
        pts = frozenset(parse_point(tok, d) for tok in rest.split(";") if tok.strip())
        return Explicit(d, pts)
    raise ValueError(f"unknown domain spec {spec!r}")


def format_domain(domain: Domain) -> str:
    """Inverse of parse_domain, for report round-tripping."""
    if isinstance(domain, Box):
        return f"box:{','.join(map(str, domain.center))}:{domain.radius}"
    if isinstance(domain, HalfSpace):
        return f"halfspace:{domain.n}"
    if isinstance(domain, PositiveBox):
        return f"posbox:{domain.radius}"
    if isinstance(domain, Block):
        return f"block:{','.join(map(str, domain.lo))}:{','.join(map(str, domain.hi))}"
    if isinstance(domain, Explicit):
        return "explicit:" + ";".join(",".join(map(str, p)) for p in sorted(domain.points))
    if isinstance(domain, Intersection):
        return "intersection(" + "&".join(format_domain(s) for s in domain.parts) + ")"
    raise TypeError(type(domain).__name__)
