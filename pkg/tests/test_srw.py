import math

import numpy as np
import pytest

from wsawlab import enumeration as en
from wsawlab import srw
from wsawlab.lattice import Explicit, full_box
from wsawlab.walks import ModelParams


def test_green_exact_singleton():
    t = srw.green_exact(2, 0.9, Explicit(2, frozenset([(0, 0)])))
    assert t.value((0, 0), (0, 0)) == 1.0


def test_green_exact_two_site_hand_solve():
    dom = Explicit(2, frozenset([(0, 0), (1, 0)]))
    t = srw.green_exact(2, 0.25, dom)
    assert t.value((0, 0), (0, 0)) == pytest.approx(16 / 15, rel=1e-14)
    assert t.value((0, 0), (1, 0)) == pytest.approx(4 / 15, rel=1e-14)


def test_green_exact_matches_enumeration():
    dom = full_box(2, 1)
    t = srw.green_exact(2, 0.125, dom)
    p = ModelParams(2, 0.0, 0.125)
    for y in t.points:
        enc = en.green(p, dom, (0, 0), y, 18)
        assert enc.lower - 1e-11 <= t.value((0, 0), y) <= enc.upper + 1e-11


def test_green_exact_rejects_supercritical_beta():
    # 5x5 grid spectral radius ~3.46, so beta=0.3 makes the system singular
    with pytest.raises(ValueError):
        srw.green_exact(2, 0.3, full_box(2, 2))


def test_green_exact_needs_finite_domain():
    from wsawlab.lattice import HalfSpace

    with pytest.raises(ValueError):
        srw.green_exact(2, 0.1, HalfSpace(2, 0))


def test_green_exact_column_matches_matrix():
    dom = full_box(2, 2)
    t = srw.green_exact(2, 0.2, dom)
    col = srw.green_exact_column(2, 0.2, dom, (1, 1))
    for p in t.points:
        assert col[p] == pytest.approx(t.value(p, (1, 1)), rel=1e-10, abs=1e-12)


def test_gambler_ruin_one_step():
    assert srw.gambler_ruin_truncated(2, 0, 1) == pytest.approx(0.25, abs=0)


def test_gambler_ruin_monotone_bounded():
    vals = [srw.gambler_ruin_truncated(2, 0, n) for n in (1, 10, 100, 1000)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert all(0 <= v <= 1 for v in vals)


def test_gambler_ruin_deeper_halfspace_is_slower():
    assert srw.gambler_ruin_truncated(2, 3, 500) < srw.gambler_ruin_truncated(2, 0, 500)


def brute_halfspace_visits(d, x, T, R):
    """Dense slab DP oracle (absorbed once the first coordinate goes negative)."""
    shape = (R + 1,) + (2 * R + 1,) * (d - 1)
    dist = np.zeros(shape)

    def idx(p):
        return (p[0],) + tuple(c + R for c in p[1:])

    dist[idx((0,) * d)] = 1.0
    visits = 0.0
    tgt = idx(x)
    prob = 1.0 / (2 * d)
    for _ in range(T):
        visits += dist[tgt]
        nxt = np.zeros(shape)
        for axis in range(d):
            for s in (1, -1):
                src = [slice(None)] * d
                dst = [slice(None)] * d
                if s == 1:
                    src[axis] = slice(0, -1)
                    dst[axis] = slice(1, None)
                else:
                    src[axis] = slice(1, None)
                    dst[axis] = slice(0, -1)
                nxt[tuple(dst)] += prob * dist[tuple(src)]
        dist = nxt
    return visits


@pytest.mark.parametrize("x", [(1, 0, 0), (2, 0, 0), (1, 1, 0), (3, 1, 1), (0, 2, 0)])
def test_halfspace_visits_matches_slab_dp(x):
    mine = srw.halfspace_visits(3, x, 12)
    ref = brute_halfspace_visits(3, x, 12, R=14)
    assert mine == pytest.approx(ref, abs=1e-12)


def test_halfspace_visits_d4_matches_slab_dp():
    mine = srw.halfspace_visits(4, (1, 0, 0, 0), 8)
    ref = brute_halfspace_visits(4, (1, 0, 0, 0), 8, R=9)
    assert mine == pytest.approx(ref, abs=1e-12)


def test_halfspace_visits_decreasing_along_axis():
    vals = [srw.halfspace_visits(3, (k, 0, 0), 2000) for k in range(1, 7)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_halfspace_visits_unreachable():
    assert srw.halfspace_visits(3, (30, 0, 0), 10) == 0.0


def test_halfspace_visits_validation():
    with pytest.raises(ValueError):
        srw.halfspace_visits(2, (1, 0), 100)
    with pytest.raises(ValueError):
        srw.halfspace_visits(3, (-1, 0, 0), 100)


def test_coupling_identical_starts():
    st = srw.coupling_merge_stats(2, (1, 0), (1, 0), 50, 500, srw.RandomSource(5))
    assert all(v == 0.0 for v in st.survival)


def test_coupling_survival_nonincreasing():
    st = srw.coupling_merge_stats(
        2, (1, 0), (-1, 0), 200, 20_000, srw.RandomSource(5), times=[10, 50, 100, 200]
    )
    assert all(a >= b for a, b in zip(st.survival, st.survival[1:]))


def test_coupling_preserves_marginals():
    # each walk alone is a simple random walk: per-coordinate mean ~ start,
    # variance ~ horizon/d, checked within 4 sigma
    horizon, trials = 300, 40_000
    st = srw.coupling_merge_stats(2, (1, 0), (-1, 0), horizon, trials,
                                  srw.RandomSource(42), times=[horizon])
    var_exp = horizon / 2
    # var of the sample mean is var/n; sd of the sample variance ~ var*sqrt(2/n)
    for mean, var, start in [
        (st.marginal_mean_u, st.marginal_var_u, (1, 0)),
        (st.marginal_mean_v, st.marginal_var_v, (-1, 0)),
    ]:
        for a in range(2):
            assert abs(mean[a] - start[a]) < 4 * math.sqrt(var_exp / trials)
            assert abs(var[a] - var_exp) < 4 * var_exp * math.sqrt(2.0 / trials)


def test_coupling_reproducible():
    a = srw.coupling_merge_stats(2, (1, 0), (-1, 0), 100, 5000, srw.RandomSource(9), times=[50])
    b = srw.coupling_merge_stats(2, (1, 0), (-1, 0), 100, 5000, srw.RandomSource(9), times=[50], threads=4)
    assert a.survival == b.survival and a.marginal_mean_u == b.marginal_mean_u


def test_coupling_odd_parity_never_merges():
    st = srw.coupling_merge_stats(2, (1, 0), (0, 0), 100, 2000, srw.RandomSource(3), times=[100])
    assert st.survival[0] == 1.0


def test_exit_time_L1_exact():
    mean, se = srw.exit_time_mean(2, 1, (0, 0), 200, srw.RandomSource(1))
    assert mean == 1.0 and se == 0.0


def test_exit_time_grows_with_L():
    rng = srw.RandomSource(2)
    m2, _ = srw.exit_time_mean(2, 2, (0, 0), 4000, rng)
    m5, _ = srw.exit_time_mean(2, 5, (0, 0), 4000, rng)
    assert m2 < m5


def test_exit_time_below_quadratic_ceiling():
    # measured check of the 9*d*L^2 + 1 ceiling for the box exit time
    mean, se = srw.exit_time_mean(2, 10, (0, 0), 30_000, srw.RandomSource(4), threads=2)
    assert mean + 4 * se <= 9 * 2 * 10**2 + 1


def test_exit_time_reproducible():
    a = srw.exit_time_mean(2, 4, (1, 0), 3000, srw.RandomSource(7))
    b = srw.exit_time_mean(2, 4, (1, 0), 3000, srw.RandomSource(7), threads=3)
    assert a == b


def test_exit_time_validation():
    with pytest.raises(ValueError):
        srw.exit_time_mean(2, 1, (1, 0), 10, srw.RandomSource(1))


def test_random_source_validation():
    with pytest.raises(ValueError):
        srw.RandomSource(1, algorithm="mt19937")
