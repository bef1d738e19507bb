"""Derived quantities: sharp lengths, correlation-length fits, and the
error amplitude of the reversed exit-edge decomposition.

The sharp length is the first scale k at which phi(Lambda_k) certifiably
drops below the threshold (exp(-2), or 1-eps for the generalized length).
Threshold comparisons use enclosure semantics throughout: a scan result is
decided only when the enclosures decide it, and straddling enclosures are
reported as inconclusive rather than collapsed to a boolean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import enclosure as ival
from .enclosure import Enclosure
from .enumeration import green_row, phi
from .lattice import Domain, Point, exit_edges, full_box
from .walks import ModelParams

SHARP_THRESHOLD = math.exp(-2.0)


@dataclass
class SharpLengthResult:
    """Outcome of the scan for inf{k >= 1 : phi(Lambda_k) <= threshold}."""

    threshold: float
    status: str                    # "decided" | "exceeds kmax" | "inconclusive"
    value: int | None              # the decided k
    inconclusive_at: int | None
    phi_trace: list[tuple[int, Enclosure]] = field(default_factory=list)

    def value_str(self) -> str:
        if self.status == "decided":
            return str(self.value)
        if self.status == "exceeds kmax":
            return "exceeds kmax"
        return f"inconclusive at k={self.inconclusive_at}"

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "status": self.status,
            "value": self.value,
            "inconclusive_at": self.inconclusive_at,
            "phi_trace": [(k, e.to_dict()) for k, e in self.phi_trace],
        }


def sharp_length_eps(
    params: ModelParams, epsilon: float, kmax: int, N: int, **kwargs
) -> SharpLengthResult:
    """Scan k = 1..kmax for the first certified phi(Lambda_k) <= 1 - epsilon.

    Decided means every earlier scale is certified above the threshold and
    scale k is certified at or below it.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    threshold = 1.0 - epsilon
    trace = []
    for k in range(1, kmax + 1):
        e = phi(params, full_box(params.d, k), N, **kwargs)
        trace.append((k, e))
        if e.upper <= threshold:
            return SharpLengthResult(threshold, "decided", k, None, trace)
        if e.lower <= threshold:
            return SharpLengthResult(threshold, "inconclusive", None, k, trace)
        # certified phi > threshold at this scale; keep scanning
    return SharpLengthResult(threshold, "exceeds kmax", None, None, trace)


def sharp_length(params: ModelParams, kmax: int, N: int, **kwargs) -> SharpLengthResult:
    """The sharp length: first k with phi(Lambda_k) <= exp(-2)."""
    return sharp_length_eps(params, 1.0 - SHARP_THRESHOLD, kmax, N, **kwargs)


@dataclass
class XiFit:
    """Least-squares decay-rate fit; an estimate, not a certified quantity.

    The subadditive limit defining the correlation length is not computable
    at a finite cutoff; this reports the slope of -log G(0, n*e1) against n
    on the sampled range, with residuals for judging the fit.
    """

    inverse_xi: float
    xi: float
    intercept: float
    residuals: list[float]
    points: list[tuple[int, float]]
    N: int

    def to_dict(self) -> dict:
        return {
            "inverse_xi": self.inverse_xi,
            "xi": self.xi,
            "intercept": self.intercept,
            "residuals": self.residuals,
            "points": self.points,
            "N": self.N,
            "estimate_only": True,
        }


def correlation_length_estimate(
    params: ModelParams, n_list: list[int], N: int, **kwargs
) -> XiFit:
    """Fit -log G(0, n*e1) = n/xi + const over the given n (full space)."""
    if not n_list:
        raise ValueError("n_list must be nonempty")
    if any(n < 1 or n > N for n in n_list):
        raise ValueError("every n must satisfy 1 <= n <= N")
    o = (0,) * params.d
    row = green_row(params, None, o, N, **kwargs)
    pts = []
    for n in n_list:
        target = (n,) + (0,) * (params.d - 1)
        lo = row.lower_at(target)
        if lo <= 0.0:
            raise ValueError(f"G(0, {n}*e1) lower bound is 0; increase the cutoff N")
        pts.append((n, -math.log(lo)))
    ns = np.array([p[0] for p in pts], dtype=float)
    ys = np.array([p[1] for p in pts])
    slope, intercept = np.polyfit(ns, ys, 1)
    resid = (ys - (slope * ns + intercept)).tolist()
    slope = float(slope)
    xi = math.inf if slope <= 0 else 1.0 / slope
    return XiFit(slope, xi, float(intercept), resid, pts, N)


@dataclass
class ErrorAmplitudeResult:
    """Per-site and summed error amplitude of the reversed decomposition."""

    per_u: dict[Point, Enclosure]
    total: Enclosure

    def to_dict(self) -> dict:
        return {
            "per_u": {",".join(map(str, u)): e.to_dict() for u, e in self.per_u.items()},
            "total": self.total.to_dict(),
        }


def error_amplitude(
    params: ModelParams, S: Domain, Lam: Domain, N: int, **kwargs
) -> ErrorAmplitudeResult:
    """Enclosures of E(u) = sum_{exit edges (y,z) of S in Lam}
    G^S(0,u) G^S(u,y) beta G^Lam(z,u), and of the sum over u.

    The u-sum ranges over S clipped to the length-N reachable window
    (for finite S inside the window this is the whole of S).
    """
    d = params.d
    o = (0,) * d
    if not S.contains(o):
        raise ValueError("error amplitude needs 0 in S")
    row0 = green_row(params, S, o, N, **kwargs)
    window = full_box(d, N)
    edges = exit_edges(S, Lam, bound=window)
    beta_e = ival.exact(params.beta, N)
    z_rows = {}
    for _, z in edges:
        if z not in z_rows:
            z_rows[z] = green_row(params, Lam, z, N, **kwargs)
    per_u: dict[Point, Enclosure] = {}
    for u in sorted(row0.cells.index.keys()):
        g0u = row0.enclosure(u)
        if g0u.upper == 0.0:
            per_u[u] = ival.exact(0.0, N)
            continue
        row_u = green_row(params, S, u, N, **kwargs)
        terms = []
        for y, z in edges:
            terms.append(
                ival.mul(
                    ival.mul(ival.mul(g0u, row_u.enclosure(y)), beta_e),
                    z_rows[z].enclosure(u),
                )
            )
        per_u[u] = ival.add_many(terms)
    total = ival.add_many(per_u.values()) if per_u else ival.exact(0.0, N)
    return ErrorAmplitudeResult(per_u, total)


def face_set(d: int, n: int) -> list[Point]:
    """A_n: the points with x_1 = |x| = n (a face of the box)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pts = []
    box = full_box(d - 1, n) if d > 1 else None
    if d == 1:
        return [(n,)]
    from .lattice import iter_points

    for rest in iter_points(box):
        pts.append((n,) + rest)
    return pts


@dataclass
class AvgLowerReport:
    """Outcome of the averaged half-space lower-bound check."""

    n: int
    epsilon: float
    precondition_met: bool
    precondition_note: str
    avg: Enclosure | None
    chain_value: float | None
    verdict: str  # "Holds" | "Fails" | "Inconclusive" | "Vacuous"
    face_size: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "epsilon": self.epsilon,
            "precondition_met": self.precondition_met,
            "precondition_note": self.precondition_note,
            "avg": self.avg.to_dict() if self.avg else None,
            "chain_value": self.chain_value,
            "verdict": self.verdict,
            "face_size": self.face_size,
        }


def halfspace_avg_lower_check(
    params: ModelParams, n: int, epsilon: float, N: int, **kwargs
) -> AvgLowerReport:
    """Check avg_{x in A_n} G^H(0,x) >= (1-eps) / (2 d beta |A_n|)
    whenever n is certifiably below the generalized sharp length.

    The precondition n < L(eps) is certified by phi(Lambda_k) > 1-eps for
    every k <= n; when that cannot be certified the check is vacuous.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    d = params.d
    face = face_set(d, n)
    size = len(face)
    if params.beta == 0.0:
        return AvgLowerReport(
            n, epsilon, False, "beta=0: phi vanishes at every scale, so n >= L(eps)",
            None, None, "Vacuous", size,
        )
    threshold = 1.0 - epsilon
    for k in range(1, n + 1):
        e = phi(params, full_box(d, k), N, **kwargs)
        if e.lower <= threshold:
            note = (
                f"phi(Lambda_{k}) lower bound {e.lower:.6g} does not certify "
                f"> {threshold:.6g}; cannot certify n < L(eps)"
            )
            return AvgLowerReport(n, epsilon, False, note, None, None, "Vacuous", size)
    from .lattice import HalfSpace

    row = green_row(params, HalfSpace(d, 0), (0,) * d, N, **kwargs)
    avg = ival.scale(ival.add_many(row.enclosure(x) for x in face), 1.0 / size)
    chain = threshold / (2 * d * params.beta * size)
    if avg.lower >= chain:
        verdict = "Holds"
    elif avg.upper < chain:
        verdict = "Fails"
    else:
        verdict = "Inconclusive"
    return AvgLowerReport(
        n, epsilon, True, f"certified n < L(eps) via phi lower bounds", avg, chain,
        verdict, size,
    )


def beta_c_bracket(d: int) -> dict:
    """The standing bracket for the critical point; the connective constant
    stays symbolic."""
    return {"lower": 1.0 / (2 * d), "upper": "1/mu_c(d)", "mu_c": "symbolic"}
