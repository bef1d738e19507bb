import json
import math

import pytest

from wsawlab import enumeration as en
from wsawlab import verifier as vf
from wsawlab.enclosure import Enclosure
from wsawlab.lattice import full_box
from wsawlab.walks import ModelParams


@pytest.fixture(autouse=True)
def fresh_cache():
    en.clear_cache()
    yield
    en.clear_cache()


def test_compare_le_holds_fails_inconclusive():
    a = Enclosure(0.1, 0.2, 8, True)
    b = Enclosure(0.3, 0.4, 8, True)
    assert vf.compare_le(a, b).verdict == vf.HOLDS
    assert vf.compare_le(b, a).verdict == vf.FAILS
    c = Enclosure(0.15, 0.35, 8, True)
    assert vf.compare_le(a, c).verdict == vf.INCONCLUSIVE


def test_compare_antisymmetry():
    # swapping sides and flipping the orientation gives the same verdict
    cases = [
        (Enclosure(0.1, 0.2, 8, True), Enclosure(0.3, 0.4, 8, True)),
        (Enclosure(0.3, 0.4, 8, True), Enclosure(0.1, 0.2, 8, True)),
        (Enclosure(0.1, 0.35, 8, True), Enclosure(0.3, 0.4, 8, True)),
        (Enclosure(0.2, 0.2, 8, True), Enclosure(0.2, 0.2, 8, True)),
    ]
    for a, b in cases:
        le = vf.compare_le(a, b)
        ge = vf.compare_ge(b, a)
        assert le.verdict == ge.verdict
        assert le.margin == ge.margin


def test_sl_upper_degenerate_s_equals_lambda():
    p = ModelParams(2, 0.5, 0.1)
    dom = full_box(2, 2)
    rep = vf.check_simon_lieb_upper(p, dom, dom, (1, 1), 10)
    assert rep.verdict == vf.HOLDS and rep.margin == 0.0


def test_sl_beta_zero_both_sides_are_indicator():
    p = ModelParams(2, 0.5, 0.0)
    S, Lam = full_box(2, 1), full_box(2, 3)
    for x, expect in [((0, 0), 1.0), ((2, 1), 0.0)]:
        up = vf.check_simon_lieb_upper(p, S, Lam, x, 8)
        assert up.verdict == vf.HOLDS
        assert up.lhs.lower == up.lhs.upper == expect
        rev = vf.check_simon_lieb_reversed(p, S, Lam, x, 8)
        assert rev.verdict == vf.HOLDS


def test_sl_upper_example_instance():
    p = ModelParams(2, 0.5, 0.1)
    rep = vf.check_simon_lieb_upper(
        p, full_box(2, 1), full_box(2, 3), (3, 0), 16, prune_tol=5e-15, threads=2)
    assert rep.verdict == vf.HOLDS


def test_sl_reversed_example_instance():
    p = ModelParams(2, 1.0, 0.1)
    rep = vf.check_simon_lieb_reversed(
        p, full_box(2, 1), full_box(2, 3), (2, 1), 16, prune_tol=5e-15, threads=2)
    assert rep.verdict == vf.HOLDS


def test_sl_lam_zero_pins_value():
    # at lam=0 the exit decomposition is an identity, so a strict <= can
    # never be certified (both verdicts are Inconclusive at best, never
    # Fails), and the correction term vanishes: the upper and reversed
    # right-hand sides coincide and their enclosure overlaps the left one,
    # pinning the common value to within the sum of the widths
    p = ModelParams(2, 0.0, 0.1)
    S, Lam, x = full_box(2, 1), full_box(2, 3), (2, 0)
    up = vf.check_simon_lieb_upper(p, S, Lam, x, 14)
    rev = vf.check_simon_lieb_reversed(p, S, Lam, x, 14)
    assert up.verdict != vf.FAILS and rev.verdict != vf.FAILS
    assert rev.rhs.lower == up.rhs.lower and rev.rhs.upper == up.rhs.upper
    lo = max(up.lhs.lower, up.rhs.lower)
    hi = min(up.lhs.upper, up.rhs.upper)
    assert lo <= hi + 1e-15  # the common value lies in the overlap
    assert hi - lo <= up.lhs.width() + up.rhs.width() + 1e-15


def test_sl_never_fails_on_grid():
    p_grid = [(0.25, 0.08), (1.0, 0.08)]
    S, Lam = full_box(2, 1), full_box(2, 2)
    for lam, beta in p_grid:
        p = ModelParams(2, lam, beta)
        for x in [(0, 0), (1, 1), (2, 0), (2, 2)]:
            up = vf.check_simon_lieb_upper(p, S, Lam, x, 12, prune_tol=1e-16)
            rev = vf.check_simon_lieb_reversed(p, S, Lam, x, 12, prune_tol=1e-16)
            assert up.verdict != vf.FAILS
            assert rev.verdict != vf.FAILS


def test_sl_precondition_errors():
    p = ModelParams(2, 0.5, 0.1)
    with pytest.raises(ValueError):
        vf.check_simon_lieb_upper(
            p, full_box(2, 1), full_box(2, 3), (4, 0), 8)  # x outside Lambda
    from wsawlab.lattice import Explicit

    with pytest.raises(ValueError):
        vf.check_simon_lieb_upper(
            p, Explicit(2, frozenset([(1, 0)])), full_box(2, 3), (0, 0), 8)


def test_weight_sandwich_zero_violations():
    p = ModelParams(3, 0.7, 0.1)
    rep = vf.check_weight_sandwich(p, trials=1000, max_len=12, seed=123)
    assert rep.trials == 1000
    assert rep.violations == 0
    assert rep.worst_case is None


def test_weight_sandwich_lam_zero_equality():
    rep = vf.check_weight_sandwich(ModelParams(2, 0.0, 0.1), 200, 8, seed=5)
    assert rep.violations == 0
    assert rep.max_rel_excess == 0.0


def test_bootstrap_beta_zero_all_hold():
    rep = vf.check_bootstrap_conditions(ModelParams(2, 0.3, 0.0), C=1.0, nmax=3, N=8)
    for row in rep.rows:
        assert row.l1.verdict == vf.HOLDS
        assert row.linf.verdict == vf.HOLDS


def test_bootstrap_linf_needs_C_at_least_one():
    # G^{H_0}(0,0) >= 1 from the zero-length walk, so C=0.5 certifiably fails at n=0
    rep = vf.check_bootstrap_conditions(ModelParams(2, 0.0, 0.05), C=0.5, nmax=0, N=10)
    assert rep.rows[0].linf.verdict == vf.FAILS


def test_bootstrap_at_random_walk_point():
    # 2d*beta = 1: no convergent tail, so the l1 condition cannot be certified
    rep = vf.check_bootstrap_conditions(ModelParams(2, 0.0, 0.25), C=2.0, nmax=1, N=12)
    for row in rep.rows:
        assert row.l1.verdict == vf.INCONCLUSIVE
        assert row.l1.lhs.lower < 1.0 + 0.25


def test_bootstrap_subcritical_holds():
    rep = vf.check_bootstrap_conditions(
        ModelParams(2, 0.5, 0.15), C=2.0, nmax=2, N=14, prune_tol=1e-15, threads=2)
    for row in rep.rows:
        assert row.l1.verdict == vf.HOLDS
        assert row.linf.verdict == vf.HOLDS
        assert row.phi_excess_over_lam is not None
    assert rep.min_C_certifiable <= 2.0


def test_phi_excess_grid_trend():
    # measured (phi - 1)/lam across a lam grid; subcritical phi < 1 keeps
    # the excess negative, shrinking in magnitude as lam grows
    rows = vf.phi_excess_grid(2, 0.15, [0.25, 0.5, 1.0], 0, 12, prune_tol=1e-14)
    assert [r["lam"] for r in rows] == [0.25, 0.5, 1.0]
    assert all(r["excess_lower"] <= r["excess_upper"] for r in rows)
    mags = [abs(r["excess_upper"]) for r in rows]
    assert mags == sorted(mags, reverse=True)
    with pytest.raises(ValueError):
        vf.phi_excess_grid(2, 0.15, [0.0], 0, 8)


def test_iterated_decay_vacuous():
    rep = vf.check_iterated_decay(ModelParams(2, 0.5, 0.05), (1, 0), 12, prune_tol=1e-16)
    assert rep.verdict == vf.VACUOUS


def test_iterated_decay_holds():
    rep = vf.check_iterated_decay(
        ModelParams(2, 0.5, 0.05), (4, 0), 14, prune_tol=1e-16, threads=2)
    assert rep.verdict == vf.HOLDS
    assert rep.instance["L"] == 1 and rep.instance["k"] == 1


def test_iterated_decay_phi_power_below_threshold():
    p = ModelParams(2, 0.5, 0.05)
    rep = vf.check_iterated_decay(p, (6, 0), 14, prune_tol=1e-16, threads=2)
    k = rep.instance["k"]
    from wsawlab.observables import sharp_length

    sl = sharp_length(p, 8, 14, prune_tol=1e-16)
    phi_L = next(e for kk, e in sl.phi_trace if kk == sl.value)
    assert phi_L.upper ** k <= math.exp(-2.0 * k) + 1e-15


def test_iterated_decay_undecidable_raises():
    # at beta near critical with tiny kmax the scan cannot decide
    with pytest.raises(ValueError):
        vf.check_iterated_decay(ModelParams(2, 0.0, 0.25), (4, 0), 10, kmax=1)


def test_harnack_single_point_ratio_one():
    rep = vf.measure_harnack_ratio(2, 0.2, 0, 1.0, (4, 0), 6)
    assert rep.ratio == 1.0


def test_harnack_example_d3():
    rep = vf.measure_harnack_ratio(3, 1 / 6 * 0.9, 2, 1.0, (8, 0, 0), 10)
    assert rep.ratio >= 1.0
    assert math.isfinite(rep.ratio)
    assert rep.max_dilated >= rep.max_inner


def test_harnack_validation():
    with pytest.raises(ValueError):
        vf.measure_harnack_ratio(2, 0.2, 2, 1.0, (3, 0), 6)  # x inside dilated box
    with pytest.raises(ValueError):
        vf.measure_harnack_ratio(2, 0.2, 1, 1.0, (7, 0), 6)  # x outside ambient box


def test_reports_serialize_to_json():
    p = ModelParams(2, 0.5, 0.1)
    rep = vf.check_simon_lieb_upper(p, full_box(2, 1), full_box(2, 2), (2, 0), 10)
    text = json.dumps(rep.to_dict())
    back = json.loads(text)
    assert back["verdict"] == rep.verdict
    assert back["instance"]["S"] == "box:0,0:1"
