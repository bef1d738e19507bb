"""Simple-random-walk (lam = 0) oracles and measurements.

Green functions on finite domains come from the linear system
(I - beta*A) G = I, an exact alternative route to the walk enumeration.
The half-space quantities use exact one-dimensional ballot counts: the
exit time of a half-space depends on the first coordinate alone, and
conditioned on which steps move that coordinate the other coordinates form
an independent lower-dimensional walk.

Monte Carlo routines (reflection coupling, exit times) are reproducible
bit-for-bit from (seed, trials): every trial consumes its own SplitMix64
substream and reductions run in trial order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import eigsh, splu
from scipy.special import gammaln

from . import _kernels
from .enumeration import build_cell_graph
from .lattice import Domain, Point

_DENSE_LIMIT = 4096


@dataclass(frozen=True)
class RandomSource:
    """Named deterministic PRNG; identical seed gives an identical stream."""

    seed: int
    algorithm: str = "splitmix64"

    def __post_init__(self):
        if self.algorithm != "splitmix64":
            raise ValueError(f"unknown PRNG algorithm {self.algorithm!r}")


class GreenTable:
    """Dense Green matrix on a finite domain with point lookup."""

    def __init__(self, points: list[Point], matrix: np.ndarray):
        self.points = points
        self.index = {p: i for i, p in enumerate(points)}
        self.matrix = matrix

    def value(self, x: Point, y: Point) -> float:
        return float(self.matrix[self.index[x], self.index[y]])


def _domain_graph(d: int, domain: Domain):
    size = domain.size()
    if size is None:
        raise ValueError("green_exact needs a finite domain")
    # radius large enough that the window covers the whole domain
    radius = 1
    while True:
        cells = build_cell_graph(domain, (0,) * d, radius)
        if len(cells.pts) == size:
            return cells
        if len(cells.pts) > size:  # pragma: no cover - size() is exact
            raise RuntimeError("domain size inconsistent with membership")
        radius *= 2
        if radius > 1 << 20:
            raise RuntimeError("domain does not fit any reasonable window")


def _adjacency(cells) -> sparse.csr_matrix:
    n = len(cells.pts)
    rows, cols = [], []
    for col in range(cells.nbr.shape[1]):
        v = cells.nbr[:, col]
        ok = v >= 0
        rows.append(np.nonzero(ok)[0])
        cols.append(v[ok])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    return sparse.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(n, n)
    )


def _check_spectral(d: int, beta: float, adj: sparse.csr_matrix) -> None:
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if 2 * d * beta <= 1.0:
        # max degree < 2d-regularity is impossible on a finite piece of Z^d,
        # so the spectral radius is < 2d and beta*A is a strict contraction
        return
    n = adj.shape[0]
    if n == 1:
        lam_max = 0.0
    elif n <= 64:
        lam_max = float(np.max(np.linalg.eigvalsh(adj.toarray())))
    else:
        lam_max = float(eigsh(adj, k=1, which="LA", return_eigenvectors=False)[0])
    if beta * lam_max >= 1.0:
        raise ValueError(
            f"beta={beta} too large: spectral radius {lam_max:.6f} gives a singular system"
        )


def green_exact(d: int, beta: float, domain: Domain) -> GreenTable:
    """Exact lam=0 Green matrix: G = (I - beta*A)^-1 on the finite domain."""
    cells = _domain_graph(d, domain)
    adj = _adjacency(cells)
    _check_spectral(d, beta, adj)
    n = adj.shape[0]
    points = [tuple(int(c) for c in p) for p in cells.pts]
    if n <= _DENSE_LIMIT:
        m = np.eye(n) - beta * adj.toarray()
        g = np.linalg.solve(m, np.eye(n))
    else:
        raise ValueError(
            f"domain has {n} sites; use green_exact_column beyond {_DENSE_LIMIT}"
        )
    return GreenTable(points, g)


def green_exact_column(d: int, beta: float, domain: Domain, y: Point) -> dict[Point, float]:
    """One column G(., y) by a sparse solve; works for large finite domains."""
    cells = _domain_graph(d, domain)
    adj = _adjacency(cells)
    _check_spectral(d, beta, adj)
    n = adj.shape[0]
    points = [tuple(int(c) for c in p) for p in cells.pts]
    idx = {p: i for i, p in enumerate(points)}
    if y not in idx:
        raise ValueError(f"{y} is not in the domain")
    rhs = np.zeros(n)
    rhs[idx[y]] = 1.0
    m = sparse.identity(n, format="csc") - beta * adj.tocsc()
    col = splu(m).solve(rhs)
    return {p: float(col[i]) for p, i in idx.items()}


# ---------------------------------------------------------------------------
# Gambler's ruin and half-space visit counts
# ---------------------------------------------------------------------------


def gambler_ruin_truncated(d: int, n: int, nsteps: int) -> float:
    """P[exit time of the half-space {x_1 >= -n} is <= nsteps], exactly.

    The first coordinate moves -1/+1 with probability 1/(2d) each and
    holds otherwise; exit means reaching -n-1.  Dynamic programming on
    that one-dimensional chain.
    """
    if n < 0 or nsteps < 0:
        raise ValueError("n and nsteps must be >= 0")
    p = 1.0 / (2 * d)
    # positions -n .. nsteps (walk cannot exceed nsteps in nsteps steps)
    size = n + nsteps + 1
    alive = np.zeros(size)
    alive[n] = 1.0  # offset: position j stored at j + n
    absorbed = 0.0
    for _ in range(nsteps):
        absorbed += p * alive[0]
        up = np.zeros(size)
        up[1:] = alive[:-1]
        down = np.zeros(size)
        down[:-1] = alive[1:]
        alive = p * (up + down) + (1.0 - 2 * p) * alive
        alive[-1] += 0.0  # top edge unreachable within nsteps; kept for clarity
    return float(absorbed)


@lru_cache(maxsize=32)
def _log_factorials(n: int) -> np.ndarray:
    return gammaln(np.arange(n + 1) + 1.0)


def _log_binom(lf: np.ndarray, n, k):
    return lf[n] - lf[k] - lf[n - k]


def _ballot_stay_nonneg(lf: np.ndarray, m: np.ndarray, j: int) -> np.ndarray:
    """P[path of m +-1 steps from 0 ends at j and never goes below 0].

    Reflection at level -1: bad paths biject with free paths from -2,
    so the count is C(m, k) - C(m, k+1) with k = (m+j)/2.
    """
    out = np.zeros(len(m), dtype=float)
    ok = (m >= abs(j)) & ((m + j) % 2 == 0)
    if not ok.any():
        return out
    mm = m[ok]
    k = (mm + j) // 2
    ln2 = math.log(2.0)
    good = np.exp(_log_binom(lf, mm, k) - mm * ln2)
    kk = k + 1
    refl = np.where(kk <= mm, np.exp(_log_binom(lf, mm, np.minimum(kk, mm)) - mm * ln2), 0.0)
    out[ok] = good - refl
    return out


def _free_1d(lf: np.ndarray, s: np.ndarray, a: int) -> np.ndarray:
    """P[+-1 walk of s steps ends at a]."""
    out = np.zeros(len(s), dtype=float)
    ok = (s >= abs(a)) & ((s + a) % 2 == 0)
    if ok.any():
        ss = s[ok]
        k = (ss + a) // 2
        out[ok] = np.exp(_log_binom(lf, ss, k) - ss * math.log(2.0))
    return out


def _perp_kernel(dims: int, y: tuple, T: int) -> np.ndarray:
    """P[dims-dimensional SRW at y after s steps], for s = 0..T-1."""
    if dims < 1:
        raise ValueError("perpendicular kernel needs at least one dimension")
    lf = _log_factorials(2 * T + 4)
    s = np.arange(T)
    if dims == 1:
        return _free_1d(lf, s, y[0])
    if dims == 2:
        # 45-degree rotation maps the 2-d walk to two independent 1-d walks
        return _free_1d(lf, s, y[0] + y[1]) * _free_1d(lf, s, y[0] - y[1])
    # peel one coordinate: binomial mixing over how many steps it takes
    sub = _perp_kernel(dims - 1, y[1:], T)
    first = _free_1d(lf, s, y[0])
    p = 1.0 / dims
    out = np.zeros(T)
    logp, logq = math.log(p), math.log(1.0 - p)
    for total in range(T):
        m = np.arange(total + 1)
        lw = _log_binom(lf, total, m) + m * logp + (total - m) * logq
        out[total] = float(np.sum(np.exp(lw) * first[m] * sub[total - m]))
    return out


@lru_cache(maxsize=8)
def _halfspace_time_mix(d: int, y_perp: tuple, T: int) -> np.ndarray:
    """W[m] = sum_{s <= T-1-m} C(m+s, m) p^m q^s * perp(s, y_perp), p = 1/d."""
    lf = _log_factorials(2 * T + 4)
    perp = _perp_kernel(d - 1, y_perp, T)
    p = 1.0 / d
    logp, logq = math.log(p), math.log(1.0 - p)
    W = np.zeros(T)
    for m in range(T):
        smax = T - 1 - m
        s = np.arange(smax + 1)
        lw = _log_binom(lf, m + s, s) + m * logp + s * logq
        W[m] = float(np.sum(np.exp(lw) * perp[: smax + 1]))
    return W


def halfspace_visits(d: int, x: Point, nsteps: int) -> float:
    """Expected visits to x in the half-space {x_1 >= 0} before exit,
    truncated at the time horizon:

        E[ sum_{l < tau ^ nsteps} 1{X_l = x} ],   X_0 = 0.

    Exact: the survival constraint involves only the first coordinate,
    whose move times are a binomial thinning; the first coordinate path is
    counted by a reflection (ballot) formula and the remaining coordinates
    by the free lower-dimensional kernel.
    """
    if d <= 2:
        raise ValueError("the half-space visit bound is for d > 2")
    if len(x) != d:
        raise ValueError("point has wrong dimension")
    if x[0] < 0:
        raise ValueError("x must lie in the half-space x_1 >= 0")
    if nsteps <= 0:
        return 0.0
    T = nsteps
    W = _halfspace_time_mix(d, tuple(x[1:]), T)
    lf = _log_factorials(2 * T + 4)
    m = np.arange(T)
    a = _ballot_stay_nonneg(lf, m, x[0])
    return float(np.sum(a * W))


# ---------------------------------------------------------------------------
# Monte Carlo: reflection coupling and exit times
# ---------------------------------------------------------------------------

_MC_CHUNKS = 64


@dataclass
class MergeStats:
    """Empirical survival of the non-merged event, with binomial errors."""

    d: int
    u: Point
    v: Point
    horizon: int
    trials: int
    seed: int
    times: list[int]
    survival: list[float]
    stderr: list[float]
    never_merged: float
    marginal_mean_u: list[float]
    marginal_var_u: list[float]
    marginal_mean_v: list[float]
    marginal_var_v: list[float]

    def to_dict(self) -> dict:
        return {
            "d": self.d, "u": list(self.u), "v": list(self.v),
            "horizon": self.horizon, "trials": self.trials, "seed": self.seed,
            "times": self.times, "survival": self.survival, "stderr": self.stderr,
            "never_merged": self.never_merged,
            "marginal_mean_u": self.marginal_mean_u,
            "marginal_var_u": self.marginal_var_u,
            "marginal_mean_v": self.marginal_mean_v,
            "marginal_var_v": self.marginal_var_v,
        }


def coupling_merge_stats(
    d: int, u: Point, v: Point, horizon: int, trials: int, rng: RandomSource,
    times: list[int] | None = None, threads: int = 1,
) -> MergeStats:
    """Survival table P[not merged by n] for the reflection coupling."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if len(u) != d or len(v) != d:
        raise ValueError("points have wrong dimension")
    if times is None:
        times = sorted({min(horizon, 2**k) for k in range(int(math.log2(max(horizon, 1))) + 1)} | {horizon})
    if any(t < 0 or t > horizon for t in times):
        raise ValueError("requested times must lie in [0, horizon]")
    u0 = np.array(u, dtype=np.int64)
    v0 = np.array(v, dtype=np.int64)
    nchunks = min(_MC_CHUNKS, trials)
    bounds = [trials * g // nchunks for g in range(nchunks + 1)]

    def work(g):
        # slot horizon+1 is the never-merged sentinel
        counts = np.zeros(horizon + 2, dtype=np.int64)
        su = np.zeros(d)
        squ = np.zeros(d)
        sv = np.zeros(d)
        sqv = np.zeros(d)
        _kernels.coupling_chunk(d, u0, v0, horizon, np.uint64(rng.seed),
                                bounds[g], bounds[g + 1], counts, su, squ, sv, sqv)
        return counts, su, squ, sv, sqv

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, range(nchunks)))
    else:
        parts = [work(g) for g in range(nchunks)]
    counts = np.zeros(horizon + 2, dtype=np.int64)
    su = np.zeros(d); squ = np.zeros(d); sv = np.zeros(d); sqv = np.zeros(d)
    for c, a, b, e, f in parts:
        counts += c; su += a; squ += b; sv += e; sqv += f

    cum = np.cumsum(counts)
    survival, stderr = [], []
    for t in times:
        p_surv = 1.0 - cum[t] / trials
        survival.append(float(p_surv))
        stderr.append(float(math.sqrt(max(p_surv * (1 - p_surv), 0.0) / trials)))
    mean_u = su / trials
    var_u = squ / trials - mean_u**2
    mean_v = sv / trials
    var_v = sqv / trials - mean_v**2
    return MergeStats(
        d, u, v, horizon, trials, rng.seed, list(times), survival, stderr,
        float(1.0 - cum[horizon] / trials),
        mean_u.tolist(), var_u.tolist(), mean_v.tolist(), var_v.tolist(),
    )


def exit_time_mean(
    d: int, L: int, start: Point, trials: int, rng: RandomSource, threads: int = 1
) -> tuple[float, float]:
    """Monte Carlo mean (and standard error) of the exit time of the
    radius-(L-1) box."""
    if L < 1:
        raise ValueError("L must be >= 1")
    if max(abs(c) for c in start) > L - 1:
        raise ValueError("start must lie inside the box of radius L-1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    s0 = np.array(start, dtype=np.int64)
    nchunks = min(_MC_CHUNKS, trials)
    bounds = [trials * g // nchunks for g in range(nchunks + 1)]

    def work(g):
        return _kernels.exit_time_chunk(d, L, s0, np.uint64(rng.seed),
                                        bounds[g], bounds[g + 1])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, range(nchunks)))
    else:
        parts = [work(g) for g in range(nchunks)]
    acc = math.fsum(p[0] for p in parts)
    acc2 = math.fsum(p[1] for p in parts)
    mean = acc / trials
    var = max(acc2 / trials - mean**2, 0.0)
    return mean, math.sqrt(var / trials)
