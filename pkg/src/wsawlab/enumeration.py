"""Length-truncated walk sums with certified enclosures.

Everything here reduces to one primitive: a pruned depth-first enumeration
of the walks from x of length <= N staying inside a domain, producing for
every endpoint y the partial sum of beta^len * rho plus a single
upper-bound budget made of

* the pruned-branch bounds (zero when prune_tol = 0), and
* a geometric tail bound for walks longer than N.

The tail bound used is domain-aware.  With u_N(c) the exact number of
length-N in-domain walks from c (computed by N matrix-vector products),
the walks from x longer than N weigh at most

    beta^N * u_N(x) * sum_{j>=1} (beta*g)^j,

where g = 2d in general, and for a finite fully-materialized domain g can
be taken as max_c (A u_N)(c) / u_N(c): by positivity this ratio dominates
all further per-step growth (A u <= g u entrywise implies A^j u <= g^j u).
Both choices dominate the crude (2d beta)-geometric tail's role; the crude
bound is what makes 2d*beta < 1 sufficient for a rigorous enclosure.

A run is split at a fixed shallow depth into subtree tasks executed by a
thread pool and merged in canonical task order, so outputs are
bit-identical for any thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .enclosure import Enclosure
from .lattice import Box, Domain, Point, full_box
from .walks import ModelParams

# target number of subtree tasks; fixed (never derived from the worker
# count) so reports are byte-identical across --threads settings
_TASK_TARGET = 64
_MAX_TASK_GROUPS = 64

_row_cache: dict = {}


def clear_cache() -> None:
    _row_cache.clear()


def _split_depth(d: int, N: int) -> int:
    K = 1
    while (2 * d) ** K < _TASK_TARGET:
        K += 1
    return min(K, N)


@dataclass
class CellGraph:
    """A domain clipped to the window reachable in N steps from x."""

    pts: np.ndarray          # (ncells, d), lexicographic order
    index: dict              # Point -> cell id
    nbr: np.ndarray          # (ncells, 2d) neighbor ids, -1 if absent
    walk_counts: np.ndarray  # (ncells, N+1); [c, m] = #length-m walks from c
    confined: bool           # domain fully contained in the window


def build_cell_graph(domain: Domain | None, x: Point, N: int) -> CellGraph:
    """Cells of domain ∩ Lambda_N(x); domain=None means all of Z^d."""
    d = len(x)
    side = 2 * N + 1
    lo = np.array(x) - N
    axes = [np.arange(c - N, c + N + 1) for c in x]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts_all = np.stack([g.ravel() for g in mesh], axis=1)
    if domain is None:
        mask = np.ones(len(pts_all), dtype=bool)
        confined = False
    else:
        mask = domain.mask(pts_all)
        size = domain.size()
        confined = size is not None and size == int(mask.sum())
    pts = np.ascontiguousarray(pts_all[mask])
    ncells = len(pts)
    grid_to_cell = np.full(side**d, -1, dtype=np.int64)
    strides = np.array([side ** (d - 1 - j) for j in range(d)], dtype=np.int64)
    gidx = (pts - lo) @ strides
    grid_to_cell[gidx] = np.arange(ncells)

    nbr = np.full((ncells, 2 * d), -1, dtype=np.int32)
    rel = pts - lo
    for axis in range(d):
        for s, col in ((1, 2 * axis), (-1, 2 * axis + 1)):
            coord = rel[:, axis] + s
            ok = (coord >= 0) & (coord < side)
            ngidx = gidx[ok] + s * strides[axis]
            nbr[ok, col] = grid_to_cell[ngidx]

    counts = np.zeros((ncells, N + 1), dtype=np.float64)
    counts[:, 0] = 1.0
    u = counts[:, 0].copy()
    for m in range(1, N + 1):
        un = np.zeros(ncells)
        for col in range(2 * d):
            v = nbr[:, col]
            ok = v >= 0
            un[ok] += u[v[ok]]
        counts[:, m] = un
        u = un

    index = {tuple(int(c) for c in p): i for i, p in enumerate(pts)}
    return CellGraph(pts, index, nbr, counts, confined)


def _prune_table(cells: CellGraph, beta: float) -> np.ndarray:
    """T[c, r] = sum_{m=1..r} beta^m * walk_counts[c, m]."""
    N = cells.walk_counts.shape[1] - 1
    T = np.zeros_like(cells.walk_counts)
    acc = np.zeros(len(cells.pts))
    bp = 1.0
    for m in range(1, N + 1):
        bp *= beta
        acc = acc + bp * cells.walk_counts[:, m]
        T[:, m] = acc
    return T


def _tail_bound(cells: CellGraph, params: ModelParams, N: int, start: int) -> tuple[float, bool]:
    """Bound on the total weight of in-domain walks from start longer than N."""
    uN = cells.walk_counts[:, N]
    base = params.beta**N * float(uN[start])
    if base == 0.0:
        return 0.0, True
    growth = 2.0 * params.d
    if cells.confined:
        au = np.zeros(len(uN))
        for col in range(cells.nbr.shape[1]):
            v = cells.nbr[:, col]
            ok = v >= 0
            au[ok] += uN[v[ok]]
        pos = uN > 0
        growth = float(np.max(au[pos] / uN[pos])) if pos.any() else 0.0
    s = params.beta * growth
    if s < 1.0:
        return base * s / (1.0 - s), True
    return math.inf, False


@dataclass
class GreenRow:
    """All endpoint enclosures of one source point, from a single traversal."""

    params: ModelParams
    domain: Domain | None
    x: Point
    N: int
    prune_tol: float
    cells: CellGraph
    lower: np.ndarray
    pruned: float
    tail: float
    rigorous: bool

    def slack(self) -> float:
        if not self.rigorous:
            return math.inf
        return self.pruned + self.tail

    def lower_at(self, y: Point) -> float:
        i = self.cells.index.get(y)
        return float(self.lower[i]) if i is not None else 0.0

    def enclosure(self, y: Point) -> Enclosure:
        if self.domain is not None and not self.domain.contains(y):
            return Enclosure(0.0, 0.0, self.N, True)
        lo = self.lower_at(y)
        return Enclosure(lo, lo + self.slack(), self.N, self.rigorous)

    def total_lower(self) -> float:
        return math.fsum(self.lower.tolist())

    def as_dict(self) -> dict[Point, Enclosure]:
        out = {}
        for p, i in self.cells.index.items():
            if self.lower[i] != 0.0:
                out[p] = self.enclosure(p)
        return out


def green_row(
    params: ModelParams,
    domain: Domain | None,
    x: Point,
    N: int,
    *,
    prune_tol: float = 0.0,
    threads: int = 1,
    use_cache: bool = True,
) -> GreenRow:
    """Enclosures of G(x, y) within `domain` for every endpoint y, one DFS.

    domain=None is the full lattice (exact for the computed part because a
    length-N walk from x cannot leave the window).
    """
    if len(x) != params.d:
        raise ValueError("source point has wrong dimension")
    if domain is not None and not domain.contains(x):
        raise ValueError(f"source {x} is outside the domain")
    if N < 0:
        raise ValueError("cutoff N must be >= 0")
    key = (params, domain, x, N, float(prune_tol))
    if use_cache and key in _row_cache:
        return _row_cache[key]

    cells = build_cell_graph(domain, x, N)
    T = _prune_table(cells, params.beta)
    ncells = len(cells.pts)
    start = cells.index[x]
    twod = 2 * params.d
    pow1ml = np.array([(1.0 - params.lam) ** k for k in range(N + 2)])
    K = _split_depth(params.d, N)
    max_tasks = twod**K if K < N else 1
    task_paths = np.zeros((max_tasks, K + 1), dtype=np.int32)
    task_wgts = np.zeros(max_tasks, dtype=np.float64)
    gsum = np.zeros(ncells)
    gcomp = np.zeros(ncells)

    ntasks, pruned1 = _kernels.run_stage1(
        cells.nbr, pow1ml, params.beta, N, K, prune_tol, T, start,
        gsum, gcomp, task_paths, task_wgts,
    )
    pruned_parts = [float(pruned1)]
    if ntasks:
        ngroups = min(_MAX_TASK_GROUPS, ntasks)
        bounds = [ntasks * g // ngroups for g in range(ngroups + 1)]

        def expand(g):
            ps = np.zeros(ncells)
            pc = np.zeros(ncells)
            pr = _kernels.run_task_range(
                cells.nbr, pow1ml, params.beta, N, K, prune_tol, T,
                task_paths, task_wgts, bounds[g], bounds[g + 1], ps, pc,
            )
            return ps, pc, pr

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                parts = list(ex.map(expand, range(ngroups)))
        else:
            parts = [expand(g) for g in range(ngroups)]
        for ps, pc, pr in parts:
            _kernels.merge_into(gsum, gcomp, ps, pc)
            pruned_parts.append(float(pr))

    lower = gsum - gcomp
    pruned = math.fsum(pruned_parts)
    tail, rigorous = _tail_bound(cells, params, N, start)
    row = GreenRow(params, domain, x, N, float(prune_tol), cells, lower,
                   pruned, tail, rigorous)
    if use_cache:
        _row_cache[key] = row
    return row


def green(
    params: ModelParams,
    domain: Domain | None,
    x: Point,
    y: Point,
    N: int,
    **kwargs,
) -> Enclosure:
    """Enclosure of the two-point function G(x, y) inside `domain`."""
    if domain is not None and not domain.contains(y):
        raise ValueError(f"endpoint {y} is outside the domain")
    return green_row(params, domain, x, N, **kwargs).enclosure(y)


def phi(params: ModelParams, S: Domain, N: int, **kwargs) -> Enclosure:
    """Enclosure of the exit-edge functional

        phi(S) = sum_{y in S, z not in S, y~z} G^S(0, y) * beta.

    The lower end sums the enumerated G^S(0, y) over boundary sites within
    reach; the upper end adds 2d * beta * (pruned + tail), since every
    un-enumerated walk ends at a single y with at most 2d exit edges.
    """
    o = (0,) * params.d
    if not S.contains(o):
        raise ValueError("phi requires 0 in S")
    row = green_row(params, S, o, N, **kwargs)
    terms = []
    for p, i in row.cells.index.items():
        lo = row.lower[i]
        if lo == 0.0:
            continue
        mult = 0
        for axis in range(params.d):
            for s in (1, -1):
                q = list(p)
                q[axis] += s
                if not S.contains(tuple(q)):
                    mult += 1
        if mult:
            terms.append(mult * lo)
    lower = params.beta * math.fsum(terms)
    slack = row.slack()
    upper = math.inf if math.isinf(slack) else lower + 2 * params.d * params.beta * slack
    return Enclosure(lower, upper, N, row.rigorous)


def chi_truncated(params: ModelParams, N: int, **kwargs) -> Enclosure:
    """Enclosure of the susceptibility: the weight sum over all walks from 0."""
    row = green_row(params, None, (0,) * params.d, N, **kwargs)
    lower = row.total_lower()
    slack = row.slack()
    upper = math.inf if math.isinf(slack) else lower + slack
    return Enclosure(lower, upper, N, row.rigorous)


def bubble_truncated(params: ModelParams, N: int, R: int, **kwargs) -> Enclosure:
    """Certified bracket for the bubble diagram sum_x G(0, x)^2.

    Lower: squares of the enumerated lower bounds over the radius-R box.
    Upper (when rigorous): squares of upper bounds over the same box plus
    (far mass)^2, using sum of squares <= (sum)^2 for the far part.
    """
    if R < 0:
        raise ValueError("spatial window R must be >= 0")
    row = green_row(params, None, (0,) * params.d, N, **kwargs)
    slack = row.slack()
    inner_lo = []
    inner_hi = []
    inner_mass = []
    for p, i in row.cells.index.items():
        if max(abs(c) for c in p) <= R:
            lo = float(row.lower[i])
            inner_lo.append(lo * lo)
            inner_mass.append(lo)
            if not math.isinf(slack):
                inner_hi.append((lo + slack) ** 2)
    lower = math.fsum(inner_lo)
    if math.isinf(slack):
        return Enclosure(lower, math.inf, N, False)
    far_mass = max(0.0, row.total_lower() + slack - math.fsum(inner_mass))
    upper = math.fsum(inner_hi) + far_mass**2
    return Enclosure(lower, max(lower, upper), N, row.rigorous)


def trivial_tail_bound(params: ModelParams, N: int) -> float:
    """The crude tail sum_{m>N} (2d beta)^m; inf when 2d beta >= 1."""
    q = 2 * params.d * params.beta
    if q >= 1.0:
        return math.inf
    return q ** (N + 1) / (1.0 - q)


def halfspace_window(params: ModelParams, n: int, N: int) -> Box:
    """Bounding box covering everything reachable in N steps from 0."""
    return full_box(params.d, N)
