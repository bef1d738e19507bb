"""Command-line surface: every operation, machine-readable reports.

One flag grammar shared by all subcommands.  JSON is the canonical output
(schema_version 1); CSV is a flat projection (for `scan`, one row per
beta; for scalar commands, key/value rows).  Exit codes: 0 success,
1 usage or validation error, 2 when a verify command certifies a Fails
verdict.

Reports embed the full instance record, so any run can be reproduced from
its own output.  The row cache is cleared on entry, and all reductions are
canonical, so a report's `results` block is byte-identical for any
--threads value.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass

from . import enumeration as en
from . import mcsampler, observables, srw, verifier
from .lattice import parse_domain, parse_point
from .srw import RandomSource
from .walks import ModelParams

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    """A parsed invocation: subcommand plus validated flags."""

    command: str
    args: argparse.Namespace


def _params(args) -> ModelParams:
    return ModelParams(args.d, getattr(args, "lam", 0.0), args.beta)


def _common_flags(p: argparse.ArgumentParser, lam=True, beta=True, cutoff=True):
    p.add_argument("--d", type=int, required=True, help="lattice dimension")
    if lam:
        p.add_argument("--lambda", dest="lam", type=float, default=0.0,
                       help="self-intersection strength in [0,1]")
    if beta:
        p.add_argument("--beta", type=float, required=True, help="step weight >= 0")
    if cutoff:
        p.add_argument("--N", type=int, required=True, help="walk-length cutoff")
    p.add_argument("--prune-tol", type=float, default=0.0,
                   help="per-branch prune budget (0 = exact truncated sum)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None, help="report path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="wsaw", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("green", help="two-point function enclosure")
    _common_flags(p)
    p.add_argument("--domain", required=True)
    p.add_argument("--from", dest="src", required=True)
    p.add_argument("--to", dest="dst", required=True)

    p = sub.add_parser("phi", help="exit-edge functional enclosure")
    _common_flags(p)
    p.add_argument("--S", required=True)

    p = sub.add_parser("chi", help="susceptibility enclosure")
    _common_flags(p)

    p = sub.add_parser("bubble", help="bubble-diagram bracket")
    _common_flags(p)
    p.add_argument("--R", type=int, required=True, help="spatial window radius")

    p = sub.add_parser("sharp-length", help="sharp-length scan")
    _common_flags(p)
    p.add_argument("--kmax", type=int, default=6)
    p.add_argument("--epsilon", type=float, default=None,
                   help="use threshold 1-eps instead of exp(-2)")

    p = sub.add_parser("xi", help="correlation-length fit (estimate)")
    _common_flags(p)
    p.add_argument("--n-list", default="1,2,3,4,5")

    p = sub.add_parser("error-amplitude", help="reversed-decomposition error term")
    _common_flags(p)
    p.add_argument("--S", required=True)
    p.add_argument("--Lambda", dest="Lam", required=True)

    pv = sub.add_parser("verify", help="inequality checks")
    vsub = pv.add_subparsers(dest="verify_command", required=True)

    p = vsub.add_parser("sl-upper")
    _common_flags(p)
    p.add_argument("--S", required=True)
    p.add_argument("--Lambda", dest="Lam", required=True)
    p.add_argument("--x", required=True)

    p = vsub.add_parser("sl-reversed")
    _common_flags(p)
    p.add_argument("--S", required=True)
    p.add_argument("--Lambda", dest="Lam", required=True)
    p.add_argument("--x", required=True)

    p = vsub.add_parser("weights")
    _common_flags(p, cutoff=False)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--max-len", type=int, default=12)
    p.add_argument("--seed", type=int, default=1)

    p = vsub.add_parser("bootstrap")
    _common_flags(p)
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--nmax", type=int, required=True)

    p = vsub.add_parser("iterated-decay")
    _common_flags(p)
    p.add_argument("--x", required=True)
    p.add_argument("--kmax", type=int, default=8)

    p = vsub.add_parser("avg-lower")
    _common_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)

    ps = sub.add_parser("srw", help="lam=0 oracles and measurements")
    ssub = ps.add_subparsers(dest="srw_command", required=True)

    p = ssub.add_parser("green")
    _common_flags(p, lam=False, cutoff=False)
    p.add_argument("--domain", required=True)
    p.add_argument("--from", dest="src", required=True)
    p.add_argument("--to", dest="dst", required=True)

    p = ssub.add_parser("ruin")
    _common_flags(p, lam=False, beta=False, cutoff=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--nsteps", type=int, required=True)

    p = ssub.add_parser("halfspace")
    _common_flags(p, lam=False, beta=False, cutoff=False)
    p.add_argument("--x", required=True)
    p.add_argument("--nsteps", type=int, required=True)

    p = ssub.add_parser("coupling")
    _common_flags(p, lam=False, beta=False, cutoff=False)
    p.add_argument("--u", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--times", default=None, help="comma list of report times")

    p = ssub.add_parser("exit-time")
    _common_flags(p, lam=False, beta=False, cutoff=False)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--start", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=1)

    p = sub.add_parser("mc", help="Monte Carlo two-point estimate")
    _common_flags(p, cutoff=False)
    p.add_argument("--domain", required=True)
    p.add_argument("--from", dest="src", required=True)
    p.add_argument("--to", dest="dst", required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--strategy", choices=("uniform", "nonreversing"), default="uniform")

    p = sub.add_parser("harnack", help="measured lam=0 max/min comparison")
    _common_flags(p, lam=False, cutoff=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--box", type=int, required=True, help="ambient box radius")

    p = sub.add_parser("scan", help="tabulate chi, L, xi over a beta grid")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--beta-grid", required=True, help="start:stop:step (stop inclusive)")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--emit", default="chi,L,xi")
    p.add_argument("--kmax", type=int, default=6)
    p.add_argument("--xi-n-list", default="1,2,3,4")
    p.add_argument("--prune-tol", type=float, default=0.0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None)

    return top


def _kw(args) -> dict:
    return {"prune_tol": args.prune_tol, "threads": args.threads}


def _beta_grid(spec: str) -> list[float]:
    start_s, stop_s, step_s = spec.split(":")
    start, stop, step = float(start_s), float(stop_s), float(step_s)
    if step <= 0:
        raise ValueError("beta grid step must be > 0")
    out = []
    k = 0
    while True:
        b = start + k * step
        if b > stop + 1e-12:
            break
        out.append(round(b, 12))
        k += 1
    return out


def _dispatch(config: RunConfig) -> dict:
    args = config.args
    cmd = config.command
    if cmd == "green":
        params = _params(args)
        dom = parse_domain(args.domain, args.d)
        x = parse_point(args.src, args.d)
        y = parse_point(args.dst, args.d)
        enc = en.green(params, dom, x, y, args.N, **_kw(args))
        return {"green": enc.to_dict()}
    if cmd == "phi":
        params = _params(args)
        enc = en.phi(params, parse_domain(args.S, args.d), args.N, **_kw(args))
        return {"phi": enc.to_dict()}
    if cmd == "chi":
        params = _params(args)
        enc = en.chi_truncated(params, args.N, **_kw(args))
        return {"chi": enc.to_dict()}
    if cmd == "bubble":
        params = _params(args)
        enc = en.bubble_truncated(params, args.N, args.R, **_kw(args))
        return {"bubble": enc.to_dict()}
    if cmd == "sharp-length":
        params = _params(args)
        if args.epsilon is None:
            res = observables.sharp_length(params, args.kmax, args.N, **_kw(args))
        else:
            res = observables.sharp_length_eps(params, args.epsilon, args.kmax, args.N, **_kw(args))
        return {"sharp_length": res.to_dict()}
    if cmd == "xi":
        params = _params(args)
        ns = [int(tok) for tok in args.n_list.split(",")]
        return {"xi": observables.correlation_length_estimate(params, ns, args.N, **_kw(args)).to_dict()}
    if cmd == "error-amplitude":
        params = _params(args)
        res = observables.error_amplitude(
            params, parse_domain(args.S, args.d), parse_domain(args.Lam, args.d),
            args.N, **_kw(args))
        return {"error_amplitude": res.to_dict()}
    if cmd == "verify":
        return _dispatch_verify(args)
    if cmd == "srw":
        return _dispatch_srw(args)
    if cmd == "mc":
        params = _params(args)
        est = mcsampler.estimate_green_mc(
            params, parse_domain(args.domain, args.d),
            parse_point(args.src, args.d), parse_point(args.dst, args.d),
            args.nmax, args.samples, RandomSource(args.seed),
            strategy=args.strategy, threads=args.threads)
        return {"mc": est.to_dict()}
    if cmd == "harnack":
        rep = verifier.measure_harnack_ratio(
            args.d, args.beta, args.n, args.alpha,
            parse_point(args.x, args.d), args.box)
        return {"harnack": rep.to_dict()}
    if cmd == "scan":
        return _dispatch_scan(args)
    raise ValueError(f"unknown command {cmd!r}")


def _dispatch_verify(args) -> dict:
    sub = args.verify_command
    if sub in ("sl-upper", "sl-reversed"):
        params = _params(args)
        S = parse_domain(args.S, args.d)
        Lam = parse_domain(args.Lam, args.d)
        x = parse_point(args.x, args.d)
        fn = (verifier.check_simon_lieb_upper if sub == "sl-upper"
              else verifier.check_simon_lieb_reversed)
        rep = fn(params, S, Lam, x, args.N, **_kw(args))
        return {"verdict_report": rep.to_dict()}
    if sub == "weights":
        params = _params(args)
        rep = verifier.check_weight_sandwich(params, args.trials, args.max_len, args.seed)
        return {"weight_sandwich": rep.to_dict()}
    if sub == "bootstrap":
        params = _params(args)
        rep = verifier.check_bootstrap_conditions(params, args.C, args.nmax, args.N, **_kw(args))
        return {"bootstrap": rep.to_dict()}
    if sub == "iterated-decay":
        params = _params(args)
        rep = verifier.check_iterated_decay(
            params, parse_point(args.x, args.d), args.N, kmax=args.kmax, **_kw(args))
        return {"verdict_report": rep.to_dict()}
    if sub == "avg-lower":
        params = _params(args)
        rep = observables.halfspace_avg_lower_check(
            params, args.n, args.epsilon, args.N, **_kw(args))
        return {"avg_lower": rep.to_dict()}
    raise ValueError(f"unknown verify command {sub!r}")


def _dispatch_srw(args) -> dict:
    sub = args.srw_command
    if sub == "green":
        dom = parse_domain(args.domain, args.d)
        table = srw.green_exact(args.d, args.beta, dom)
        x = parse_point(args.src, args.d)
        y = parse_point(args.dst, args.d)
        return {"green_exact": {"value": table.value(x, y)}}
    if sub == "ruin":
        return {"ruin": {"probability": srw.gambler_ruin_truncated(args.d, args.n, args.nsteps)}}
    if sub == "halfspace":
        x = parse_point(args.x, args.d)
        return {"halfspace_visits": {"value": srw.halfspace_visits(args.d, x, args.nsteps)}}
    if sub == "coupling":
        times = None
        if args.times:
            times = [int(t) for t in args.times.split(",")]
        st = srw.coupling_merge_stats(
            args.d, parse_point(args.u, args.d), parse_point(args.v, args.d),
            args.horizon, args.trials, RandomSource(args.seed),
            times=times, threads=args.threads)
        return {"coupling": st.to_dict()}
    if sub == "exit-time":
        mean, se = srw.exit_time_mean(
            args.d, args.L, parse_point(args.start, args.d),
            args.trials, RandomSource(args.seed), threads=args.threads)
        return {"exit_time": {"mean": mean, "stderr": se}}
    raise ValueError(f"unknown srw command {sub!r}")


SCAN_COLUMNS = [
    "beta", "chi_lower", "chi_upper", "chi_rigorous",
    "L_status", "L_value", "xi", "xi_slope",
]


def _dispatch_scan(args) -> dict:
    params_base = dict(d=args.d, lam=args.lam)
    emit = set(args.emit.split(","))
    rows = []
    for beta in _beta_grid(args.beta_grid):
        params = ModelParams(d=args.d, lam=args.lam, beta=beta)
        row: dict = {"beta": beta}
        if "chi" in emit:
            chi = en.chi_truncated(params, args.N, prune_tol=args.prune_tol, threads=args.threads)
            row["chi"] = chi.to_dict()
        if "L" in emit:
            sl = observables.sharp_length(params, args.kmax, args.N,
                                          prune_tol=args.prune_tol, threads=args.threads)
            row["L"] = {"status": sl.status, "value": sl.value,
                        "inconclusive_at": sl.inconclusive_at}
        if "xi" in emit:
            ns = [int(tok) for tok in args.xi_n_list.split(",")]
            try:
                fit = observables.correlation_length_estimate(
                    params, ns, args.N, prune_tol=args.prune_tol, threads=args.threads)
                row["xi"] = {"xi": fit.xi, "slope": fit.inverse_xi}
            except ValueError as exc:
                row["xi"] = {"error": str(exc)}
        rows.append(row)
    return {
        "scan": {
            "base": params_base,
            "beta_c_bracket": observables.beta_c_bracket(args.d),
            "rows": rows,
        }
    }


def _sanitize(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float):
        if math.isinf(obj) or math.isnan(obj):
            return repr(obj)
        return obj
    return obj


def _flatten(prefix: str, obj, rows):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, obj))


def _render_csv(report: dict) -> str:
    results = report["results"]
    lines = []
    if "scan" in results:
        lines.append(",".join(SCAN_COLUMNS))
        for row in results["scan"]["rows"]:
            chi = row.get("chi", {})
            L = row.get("L", {})
            xi = row.get("xi", {})
            lines.append(",".join(str(v) for v in [
                row["beta"],
                chi.get("lower", ""), chi.get("upper", ""), chi.get("rigorous", ""),
                L.get("status", ""), L.get("value", ""),
                xi.get("xi", ""), xi.get("slope", ""),
            ]))
    else:
        lines.append("key,value")
        rows: list = []
        _flatten("", results, rows)
        for k, v in rows:
            lines.append(f"{k},{v}")
    return "\n".join(lines) + "\n"


def run(config: RunConfig) -> int:
    """Execute one parsed invocation; returns the process exit code."""
    args = config.args
    en.clear_cache()
    t0 = time.time()
    try:
        results = _dispatch(config)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    wall = time.time() - t0
    instance = {k: v for k, v in sorted(vars(args).items())
                if k not in ("out", "format")}
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": config.command,
        "instance": _sanitize(instance),
        "results": _sanitize(results),
        "meta": {"wall_time_s": wall, "threads": getattr(args, "threads", 1)},
    }
    if getattr(args, "format", "json") == "csv":
        text = _render_csv(report)
    else:
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    out = getattr(args, "out", None)
    try:
        if out:
            with open(out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    if _has_fails(results):
        return 2
    return 0


def _has_fails(obj) -> bool:
    if isinstance(obj, dict):
        if obj.get("verdict") == verifier.FAILS:
            return True
        if obj.get("violations", 0):
            return True
        return any(_has_fails(v) for v in obj.values())
    if isinstance(obj, list):
        return any(_has_fails(v) for v in obj)
    return False


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    return run(RunConfig(args.command, args))


if __name__ == "__main__":
    sys.exit(main())
