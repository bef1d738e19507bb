"""Machine checks of the model's inequalities on concrete instances.

Every check compares two enclosures and returns a three-valued verdict:
Holds when the enclosures certify the inequality, Fails when they certify
its violation, Inconclusive otherwise.  Inconclusive is never collapsed to
a boolean; an honest truncated computation sometimes cannot decide.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from . import enclosure as ival
from .enclosure import Enclosure
from .enumeration import green, green_row, phi
from .lattice import (Domain, HalfSpace, Point, exit_edges, format_domain,
                      full_box, neighbors)
from .observables import error_amplitude, sharp_length
from .srw import green_exact, green_exact_column
from .walks import ModelParams, concat, random_walk, rho, split_weight_bounds

HOLDS = "Holds"
FAILS = "Fails"
INCONCLUSIVE = "Inconclusive"
VACUOUS = "Vacuous"


@dataclass
class VerdictReport:
    """Outcome of one inequality check (orientation: lhs <= rhs).

    margin is the certification gap: rhs.lower - lhs.upper when the
    verdict is Holds or Inconclusive (positive iff certified), and
    rhs.upper - lhs.lower (negative) when the verdict is Fails.
    """

    verdict: str
    lhs: Enclosure
    rhs: Enclosure
    margin: float
    instance: dict = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "lhs": self.lhs.to_dict(),
            "rhs": self.rhs.to_dict(),
            "margin": self.margin,
            "instance": self.instance,
            "note": self.note,
        }


def compare_le(lhs: Enclosure, rhs: Enclosure, instance=None, note="") -> VerdictReport:
    """Certify lhs_true <= rhs_true from the enclosures."""
    if lhs.upper <= rhs.lower:
        return VerdictReport(HOLDS, lhs, rhs, rhs.lower - lhs.upper, instance or {}, note)
    if lhs.lower > rhs.upper:
        return VerdictReport(FAILS, lhs, rhs, rhs.upper - lhs.lower, instance or {}, note)
    return VerdictReport(INCONCLUSIVE, lhs, rhs, rhs.lower - lhs.upper, instance or {}, note)


def compare_ge(lhs: Enclosure, rhs: Enclosure, instance=None, note="") -> VerdictReport:
    """Certify lhs_true >= rhs_true (the mirrored orientation)."""
    rep = compare_le(rhs, lhs, instance, note)
    return VerdictReport(rep.verdict, lhs, rhs, rep.margin, rep.instance, rep.note)


def _exit_decomposition_rhs(
    params: ModelParams, S: Domain, Lam: Domain, x: Point, N: int, **kwargs
) -> Enclosure:
    """G^S(0,x) + sum over exit edges (y,z) of G^S(0,y) beta G^Lam(z,x)."""
    o = (0,) * params.d
    row_s = green_row(params, S, o, N, **kwargs)
    edges = exit_edges(S, Lam, bound=full_box(params.d, N))
    beta_e = ival.exact(params.beta, N)
    terms = [row_s.enclosure(x)]
    for y, z in edges:
        g_sy = row_s.enclosure(y)
        g_zx = green_row(params, Lam, z, N, **kwargs).enclosure(x)
        terms.append(ival.mul(ival.mul(g_sy, beta_e), g_zx))
    return ival.add_many(terms)


def _sl_instance(params, S, Lam, x, N) -> dict:
    return {
        "d": params.d, "lambda": params.lam, "beta": params.beta,
        "S": format_domain(S), "Lambda": format_domain(Lam),
        "x": list(x), "N": N,
    }


def check_simon_lieb_upper(
    params: ModelParams, S: Domain, Lam: Domain, x: Point, N: int, **kwargs
) -> VerdictReport:
    """Exit-edge upper decomposition:

        G^Lam(0,x) <= G^S(0,x) + sum_{y in S, z in Lam\\S, y~z}
                                  G^S(0,y) beta G^Lam(z,x).
    """
    _require_sl_preconditions(params, S, Lam, x)
    inst = _sl_instance(params, S, Lam, x, N)
    if S == Lam:
        row = green_row(params, S, (0,) * params.d, N, **kwargs)
        e = row.enclosure(x)
        return VerdictReport(HOLDS, e, e, 0.0, inst, "degenerate S = Lambda: both sides identical")
    lhs = green(params, Lam, (0,) * params.d, x, N, **kwargs)
    rhs = _exit_decomposition_rhs(params, S, Lam, x, N, **kwargs)
    return compare_le(lhs, rhs, inst)


def check_simon_lieb_reversed(
    params: ModelParams, S: Domain, Lam: Domain, x: Point, N: int, **kwargs
) -> VerdictReport:
    """Reversed decomposition with the interaction correction:

        G^Lam(0,x) >= G^S(0,x) + sum G^S(0,y) beta G^Lam(z,x)
                      - lam * sum_{u in S} E(u) G^Lam(u,x).
    """
    _require_sl_preconditions(params, S, Lam, x)
    inst = _sl_instance(params, S, Lam, x, N)
    if S == Lam:
        row = green_row(params, S, (0,) * params.d, N, **kwargs)
        e = row.enclosure(x)
        return VerdictReport(HOLDS, e, e, 0.0, inst, "degenerate S = Lambda: both sides identical")
    lhs = green(params, Lam, (0,) * params.d, x, N, **kwargs)
    base = _exit_decomposition_rhs(params, S, Lam, x, N, **kwargs)
    if params.lam == 0.0:
        return compare_ge(lhs, base, inst, "lam=0: correction term vanishes")
    amp = error_amplitude(params, S, Lam, N, **kwargs)
    correction_terms = []
    for u, e_u in amp.per_u.items():
        g_ux = green_row(params, Lam, u, N, **kwargs).enclosure(x)
        correction_terms.append(ival.mul(e_u, g_ux))
    correction = ival.scale(ival.add_many(correction_terms), params.lam)
    rhs = ival.sub(base, correction)
    return compare_ge(lhs, rhs, inst)


def _require_sl_preconditions(params, S, Lam, x):
    o = (0,) * params.d
    if not S.contains(o):
        raise ValueError("need 0 in S")
    if not Lam.contains(x):
        raise ValueError("x must lie in Lambda")
    if not Lam.contains(o):
        raise ValueError("need S subset Lambda (0 violates it)")


@dataclass
class SandwichReport:
    trials: int
    violations: int
    max_rel_excess: float
    worst_case: dict | None

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "violations": self.violations,
            "max_rel_excess": self.max_rel_excess,
            "worst_case": self.worst_case,
        }


def check_weight_sandwich(
    params: ModelParams, trials: int, max_len: int, seed: int,
    rel_tol: float = 1e-12,
) -> SandwichReport:
    """Sample random concatenation triples and verify the weight bracket.

    A triple is (w1, bridging edge (y,z), w2) with z not on w1, matching
    the exit-edge decomposition where w1 stays in a set that excludes z.
    The direct rho of the concatenation is the oracle; the bracket must
    hold up to rel_tol roundoff.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(seed)
    o = (0,) * params.d
    violations = 0
    max_excess = 0.0
    worst = None
    done = 0
    while done < trials:
        w1 = random_walk(o, rng.randrange(0, max_len + 1), rng)
        y = w1.end()
        free = [z for z in neighbors(y) if z not in w1.occupancy]
        if not free:
            continue
        z = rng.choice(free)
        w2 = random_walk(z, rng.randrange(0, max_len + 1), rng)
        lo, hi = split_weight_bounds(w1, (y, z), w2, params.lam)
        actual = rho(concat(w1, (y, z), w2), params.lam)
        scale = max(1.0, abs(actual))
        excess = max(lo - actual, actual - hi) / scale
        max_excess = max(max_excess, excess)
        if excess > rel_tol:
            violations += 1
            if worst is None or excess > worst["rel_excess"]:
                worst = {
                    "w1": w1.to_json(), "edge": [list(y), list(z)],
                    "w2": w2.to_json(), "lower": lo, "upper": hi,
                    "actual": actual, "rel_excess": excess,
                }
        done += 1
    return SandwichReport(trials, violations, max_excess, worst)


@dataclass
class BootstrapRow:
    n: int
    l1: VerdictReport
    linf: VerdictReport
    linf_window_max: Enclosure
    min_C_certifiable: float
    phi_excess_over_lam: float | None  # (phi - 1)/lam, measured, lam > 0 only

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "l1": self.l1.to_dict(),
            "linf": self.linf.to_dict(),
            "linf_window_max": self.linf_window_max.to_dict(),
            "min_C_certifiable": self.min_C_certifiable,
            "phi_excess_over_lam": self.phi_excess_over_lam,
        }


@dataclass
class BootstrapReport:
    params: ModelParams
    C: float
    N: int
    rows: list[BootstrapRow]
    min_C_certifiable: float

    def to_dict(self) -> dict:
        return {
            "d": self.params.d, "lambda": self.params.lam, "beta": self.params.beta,
            "C": self.C, "N": self.N,
            "rows": [r.to_dict() for r in self.rows],
            "min_C_certifiable": self.min_C_certifiable,
        }


def check_bootstrap_conditions(
    params: ModelParams, C: float, nmax: int, N: int, **kwargs
) -> BootstrapReport:
    """Per-n check of the two half-space bootstrap conditions:

      (l1)   phi(H_n) < 1 + 1/(2d)
      (linf) G^{H_n}(0, x) < C / (1 v n)^{d-1}  for boundary x.

    The boundary max is taken over the length-N window; boundary sites
    beyond it only carry walk mass of length > N, which the row tail
    already bounds, so the window max enclosure covers them.
    """
    if C <= 0:
        raise ValueError("C must be > 0")
    d = params.d
    o = (0,) * d
    l1_threshold = 1.0 + 1.0 / (2 * d)
    rows = []
    min_c_all = 0.0
    for n in range(nmax + 1):
        hs = HalfSpace(d, n)
        phi_enc = phi(params, hs, N, **kwargs)
        l1 = compare_le(
            phi_enc, ival.exact(l1_threshold, N),
            {"n": n, "condition": "l1", "threshold": l1_threshold},
        )
        row = green_row(params, hs, o, N, **kwargs)
        slack = row.slack()
        boundary_lo = 0.0
        for p, i in row.cells.index.items():
            if p[0] == -n and row.lower[i] > boundary_lo:
                boundary_lo = float(row.lower[i])
        # boundary sites beyond the window carry only length > N mass,
        # which slack >= tail already covers
        upper = boundary_lo + slack if not math.isinf(slack) else math.inf
        window_max = Enclosure(boundary_lo, upper, N, row.rigorous)
        linf_threshold = C / max(1, n) ** (d - 1)
        linf = compare_le(
            window_max, ival.exact(linf_threshold, N),
            {"n": n, "condition": "linf", "threshold": linf_threshold},
        )
        min_c = upper * max(1, n) ** (d - 1)
        min_c_all = max(min_c_all, min_c)
        excess = (phi_enc.lower - 1.0) / params.lam if params.lam > 0 else None
        rows.append(BootstrapRow(n, l1, linf, window_max, min_c, excess))
    return BootstrapReport(params, C, N, rows, min_c_all)


def phi_excess_grid(
    d: int, beta: float, lams, n: int, N: int, **kwargs
) -> list[dict]:
    """Measured excess (phi(H_n) - 1)/lam across a lam grid.

    No constant is asserted; the table makes the lam-linearity of the
    half-space excess inspectable.  Entries carry both enclosure ends.
    """
    out = []
    for lam in lams:
        if lam <= 0:
            raise ValueError("the excess profile needs lam > 0")
        e = phi(ModelParams(d, lam, beta), HalfSpace(d, n), N, **kwargs)
        entry = {"lam": lam, "n": n,
                 "excess_lower": (e.lower - 1.0) / lam,
                 "excess_upper": (e.upper - 1.0) / lam if not math.isinf(e.upper) else math.inf}
        out.append(entry)
    return out


def check_iterated_decay(
    params: ModelParams, x: Point, N: int, kmax: int = 8, **kwargs
) -> VerdictReport:
    """Iterated exit-edge decay through translates of the sharp-length box:

        G(0,x) <= phi(Lambda_L)^k * max{G(y,x) : y outside Lambda_L(x)},
        k = floor(|x| / (L+1)) - 1.
    """
    d = params.d
    sl = sharp_length(params, kmax, N, **kwargs)
    inst = {
        "d": d, "lambda": params.lam, "beta": params.beta,
        "x": list(x), "N": N, "L_status": sl.status, "L": sl.value,
    }
    if sl.status != "decided":
        raise ValueError(f"sharp length undecidable ({sl.value_str()}); cannot run the check")
    L = sl.value
    dist = max(abs(c) for c in x)
    k = dist // (L + 1) - 1
    inst["k"] = k
    if k <= 0:
        return VerdictReport(
            VACUOUS, ival.exact(0.0, N), ival.exact(0.0, N), 0.0, inst,
            f"|x|={dist} gives k={k} <= 0: nothing to iterate",
        )
    phi_L = next(e for kk, e in sl.phi_trace if kk == L)
    row = green_row(params, None, (0,) * d, N, **kwargs)
    lhs = row.enclosure(x)
    # translation invariance: max over y outside Lambda_L(x) of G(y, x)
    # equals max over |v| > L of G(0, v); beyond the window the row tail bounds it
    far_terms = []
    for p, i in row.cells.index.items():
        if max(abs(c) for c in p) > L:
            lo = float(row.lower[i])
            far_terms.append(Enclosure(lo, lo + row.slack(), N, row.rigorous))
    far_terms.append(Enclosure(0.0, row.tail if row.rigorous else math.inf, N, row.rigorous))
    far_max = ival.max_of(far_terms)
    rhs = ival.mul(ival.pow_int(phi_L, k), far_max)
    rep = compare_le(lhs, rhs, inst)
    rep.note = f"L={L}, k={k}, phi(Lambda_L)={phi_L.lower:.6g}..{phi_L.upper:.6g}"
    return rep


@dataclass
class HarnackReport:
    n: int
    alpha: float
    x: Point
    box_radius: int
    max_inner: float
    min_inner: float
    ratio: float
    max_dilated: float

    def to_dict(self) -> dict:
        return {
            "n": self.n, "alpha": self.alpha, "x": list(self.x),
            "box_radius": self.box_radius,
            "max_inner": self.max_inner, "min_inner": self.min_inner,
            "ratio": self.ratio, "max_dilated": self.max_dilated,
        }


def measure_harnack_ratio(
    d: int, beta: float, n: int, alpha: float, x: Point, box_radius: int,
    method: str = "srw-exact",
) -> HarnackReport:
    """Measured max/min ratio of G(u, x) over u in Lambda_n (lam = 0 only,
    by exact linear solve on the ambient box).

    Reports the empirical constant in the Harnack-style comparison; no
    assertion is made, the ratio is data.
    """
    if method != "srw-exact":
        raise ValueError("only the lam=0 exact-solve measurement is supported")
    dilated = int(math.floor((1 + alpha) * n))
    if max(abs(c) for c in x) <= dilated:
        raise ValueError("x must lie outside the dilated box")
    if max(abs(c) for c in x) > box_radius:
        raise ValueError("x must lie inside the ambient box")
    if (2 * box_radius + 1) ** d <= 4096:
        table = green_exact(d, beta, full_box(d, box_radius))
        col = {p: table.value(p, x) for p in table.points}
    else:
        col = green_exact_column(d, beta, full_box(d, box_radius), x)
    inner = [v for p, v in col.items() if max(abs(c) for c in p) <= n]
    dil = [v for p, v in col.items() if max(abs(c) for c in p) <= dilated]
    mx, mn = max(inner), min(inner)
    ratio = math.inf if mn == 0.0 else mx / mn
    return HarnackReport(n, alpha, x, box_radius, mx, mn, ratio, max(dil))
