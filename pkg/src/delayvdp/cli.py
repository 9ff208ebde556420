"""Command-line front end.

Every subcommand writes plot-ready columnar data, as CSV (default) or JSON,
to ``--out`` or stdout. Exit status is 0 on success, 2 on a configuration
error and 3 on a numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import dde_engine, model_core, spectral, stability_scan
from .errors import DelayVdpError, ModeNonexistent, NonFiniteState, OutOfDomain, NotAHopf

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(Exception):
    def __init__(self, field, message):
        super().__init__(f"invalid --{field.replace('_', '-')}: {message}")
        self.field = field


def _round(v):
    # CSV and JSON carry the same 15-significant-digit values
    if v is None or isinstance(v, (str, bool)):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    if not math.isfinite(v):
        return None
    return float(f"{v:.15g}")


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.15g}"
    return str(v)


def render(rows: Sequence[dict], columns: Sequence[str], fmt: str) -> str:
    rows = [{c: _round(r.get(c)) for c in columns} for r in rows]
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    lines = [",".join(columns)]
    lines += [",".join(_cell(r[c]) for c in columns) for r in rows]
    return "\n".join(lines) + "\n"


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- validation ---------------------------------------------------------------

def _positive(args, *names):
    for n in names:
        v = getattr(args, n, None)
        if v is not None and not (math.isfinite(v) and v > 0):
            raise ConfigError(n, f"must be a positive number, got {v}")


def _nonneg(args, *names):
    for n in names:
        v = getattr(args, n, None)
        if v is not None and not (math.isfinite(v) and v >= 0):
            raise ConfigError(n, f"must be >= 0, got {v}")


def _grid(args, default_min, default_max, default_steps, name="alpha"):
    single = getattr(args, name, None)
    if single is not None:
        if not math.isfinite(single):
            raise ConfigError(name, "must be finite")
        return np.array([single])
    lo = getattr(args, f"{name}_min")
    hi = getattr(args, f"{name}_max")
    n = getattr(args, f"{name}_steps")
    lo = default_min if lo is None else lo
    hi = default_max if hi is None else hi
    n = default_steps if n is None else n
    if n < 1:
        raise ConfigError(f"{name}_steps", f"must be >= 1, got {n}")
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise ConfigError(f"{name}_max", f"range [{lo}, {hi}] is empty or not finite")
    return np.linspace(lo, hi, n)


def _scan_cfg(args) -> stability_scan.ScanConfig:
    _positive(args, "step", "window", "tol")
    kw = {}
    if args.step is not None:
        kw["h"] = args.step
    if args.window is not None:
        kw["window"] = args.window
    if args.tol is not None:
        kw["tol"] = args.tol
    return stability_scan.ScanConfig(**kw)


# -- commands -----------------------------------------------------------------

def cmd_inphase(args) -> int:
    _nonneg(args, "eps")
    alphas = _grid(args, 0.0, 1.0, 11)
    Ts = _grid(args, 0.0, math.pi, 13, name="T")
    if np.any(Ts < 0):
        raise ConfigError("T", "delay must be >= 0")
    rows = []
    for a in alphas:
        for T in Ts:
            row = dict(alpha=a, T=T, eps=args.eps, R=None, omega=None, exists=True)
            try:
                mode = model_core.in_phase_mode(model_core.Params(a, T, args.eps))
            except ModeNonexistent:
                row["exists"] = False
            else:
                row.update(R=mode.R, omega=mode.omega)
            rows.append(row)
    _emit(render(rows, ["alpha", "T", "eps", "R", "omega", "exists"], args.format), args.out)
    return EXIT_OK


def _curve(fn, a):
    try:
        return fn(a)
    except (OutOfDomain, NotAHopf):
        return None


def cmd_curves(args) -> int:
    alphas = _grid(args, 0.0, 2.0, 201)
    rows = [
        dict(
            alpha=a,
            T_hopf=_curve(model_core.hopf_curve_ode, a),
            T_saddle_node=_curve(model_core.saddle_node_curve, a),
            T_mode_birth=_curve(model_core.mode_birth_curve, a),
        )
        for a in alphas
    ]
    cols = ["alpha", "T_hopf", "T_saddle_node", "T_mode_birth"]
    _emit(render(rows, cols, args.format), args.out)
    return EXIT_OK


def cmd_fig1(args) -> int:
    eps = 0.5 if args.eps is None else args.eps
    _nonneg(args, "eps")
    cfg = _scan_cfg(args)
    if args.alpha is not None:
        alphas = np.array([args.alpha])
    else:
        lo = model_core.ALPHA_INTERSECTION if args.alpha_min is None else args.alpha_min
        hi = 1.0 if args.alpha_max is None else args.alpha_max
        n = 20 if args.alpha_steps is None else args.alpha_steps
        if n < 1:
            raise ConfigError("alpha_steps", f"must be >= 1, got {n}")
        alphas = stability_scan.default_alpha_grid(n, lo, hi)
    if np.any(alphas < model_core.ALPHA_INTERSECTION * (1 - 1e-14)):
        raise ConfigError("alpha_min", "must be >= sqrt(2)/3")
    results = stability_scan.sweep(alphas, eps, cfg)
    rows = [
        dict(alpha=r.alpha, eps=r.eps, T_n1=r.T_series[0], T_n2=r.T_series[1],
             T_n3=r.T_series[2], T_sim=r.T_sim, T_newton=r.T_newton, error=r.error or "")
        for r in results
    ]
    cols = ["alpha", "eps", "T_n1", "T_n2", "T_n3", "T_sim", "T_newton", "error"]
    _emit(render(rows, cols, args.format), args.out)
    return EXIT_OK


def cmd_table1(args) -> int:
    cfg = _scan_cfg(args)
    eps_list = tuple(args.eps_list) if args.eps_list else stability_scan.TABLE1_EPS
    for e in eps_list:
        if not (math.isfinite(e) and e >= 0):
            raise ConfigError("eps_list", f"values must be >= 0, got {e}")
    steps = 20 if args.alpha_steps is None else args.alpha_steps
    if steps < 1:
        raise ConfigError("alpha_steps", f"must be >= 1, got {steps}")
    table = stability_scan.error_table(eps_list, stability_scan.TABLE1_N, steps, cfg)
    if args.format == "text":
        _emit(table.to_text(), args.out)
    else:
        cols = ["eps", "n", "abs", "rel", "pct", "alpha_at_max"]
        _emit(render(table.records(), cols, args.format), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    _nonneg(args, "eps", "T")
    _positive(args, "step", "window")
    if args.alpha is None or args.T is None:
        raise ConfigError("alpha" if args.alpha is None else "T", "is required for simulate")
    p = model_core.Params(args.alpha, args.T, args.eps, args.beta)
    rng = np.random.default_rng(args.seed)
    h = 0.01 if args.step is None else args.step
    if args.system == "slow":
        initial = (1.0, 0.0) if args.seed is None else tuple(rng.normal(size=2))
        prob = dde_engine.slow_flow_rhs(p, initial=initial)
        t_end = 60.0 if args.window is None else args.window
    else:
        pert = tuple(args.perturbation) if args.seed is None else tuple(0.1 * rng.normal(size=2))
        try:
            prob = dde_engine.full_system_rhs(p, pert)
        except ModeNonexistent as exc:
            raise ConfigError("T", str(exc)) from exc
        t_end = 400.0 if args.window is None else args.window
    status = EXIT_OK
    blowup = None
    try:
        traj = dde_engine.integrate(prob, t_end, h)
    except NonFiniteState as exc:
        traj, blowup, status = exc.trajectory, exc.t_blowup, EXIT_NUMERIC

    fit_traj = traj
    if args.system == "full":
        diff = traj.y[:, :2] - traj.y[:, 2:]
        fdiff = traj.f[:, :2] - traj.f[:, 2:]
        fit_traj = dde_engine.Trajectory(traj.t0, traj.h, diff, fdiff, ("dx", "dv"))
    summary = dict(system=args.system, rate=None, r_squared=None, fit=None,
                   t_blowup=blowup, step=traj.h)
    if blowup is not None:
        summary["rate"] = math.inf
    else:
        try:
            g = stability_scan.growth_rate(fit_traj, min_span=min(40.0, 0.5 * t_end))
            summary.update(rate=g.rate, r_squared=g.r_squared, fit=g.method)
        except DelayVdpError as exc:
            summary["fit"] = f"unavailable: {exc}"

    if args.format == "json":
        cols = ["t", *traj.labels]
        data = np.column_stack([traj.t, traj.y])
        payload = {
            "summary": {k: _round(v) for k, v in summary.items()},
            "trajectory": [{c: _round(v) for c, v in zip(cols, r)} for r in data],
        }
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        _emit(traj.to_csv(), args.out)
    msg = ", ".join(f"{k}={_cell(_round(v))}" for k, v in summary.items())
    print(msg, file=sys.stderr if not args.out else sys.stdout)
    return status


def cmd_hopf(args) -> int:
    _nonneg(args, "eps")
    if args.alpha is None:
        raise ConfigError("alpha", "is required for hopf")
    eps = 0.5 if args.eps is None else args.eps
    n_list = [args.n_terms] if args.n_terms else [1, 2, 3]
    try:
        points = [spectral.hopf_series(args.alpha, eps, n) for n in n_list]
    except OutOfDomain as exc:
        raise ConfigError("alpha", str(exc)) from exc
    try:
        nt = spectral.hopf_newton(args.alpha, eps, spectral.hopf_series(args.alpha, eps, 3))
        points.append(nt)
        status = EXIT_OK
    except DelayVdpError as exc:
        print(f"newton failed: {exc}", file=sys.stderr)
        status = EXIT_NUMERIC
    rows = []
    for hp in points:
        res = abs(spectral.char_eq(1j * hp.Omega, model_core.Params(args.alpha, hp.T, eps))) \
            if math.isfinite(hp.Omega) else None
        rows.append(dict(method=hp.method, alpha=hp.alpha, eps=eps, T=hp.T,
                         Omega=hp.Omega, residual=res))
    _emit(render(rows, ["method", "alpha", "eps", "T", "Omega", "residual"], args.format), args.out)
    return status


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="delayvdp",
        description="Stability of the in-phase mode of two delay-coupled van der Pol oscillators.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, formats=("csv", "json")):
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=formats, default="csv")

    def alpha_grid(p):
        p.add_argument("--alpha", type=float)
        p.add_argument("--alpha-min", type=float)
        p.add_argument("--alpha-max", type=float)
        p.add_argument("--alpha-steps", type=int)

    def scan_opts(p):
        p.add_argument("--step", type=float, help="integration step in slow time")
        p.add_argument("--window", type=float, help="slow-time length of each probe run")
        p.add_argument("--tol", type=float, help="bisection tolerance on T")

    p = sub.add_parser("inphase", help="amplitude and frequency of the in-phase mode")
    alpha_grid(p)
    p.add_argument("--T", type=float)
    p.add_argument("--T-min", type=float)
    p.add_argument("--T-max", type=float)
    p.add_argument("--T-steps", type=int)
    p.add_argument("--eps", type=float, default=0.1)
    common(p)
    p.set_defaults(func=cmd_inphase)

    p = sub.add_parser("curves", help="closed-form Hopf, saddle-node and mode-birth curves")
    alpha_grid(p)
    common(p)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("fig1", help="critical delay vs alpha: series n=1,2,3 and simulation")
    alpha_grid(p)
    p.add_argument("--eps", type=float)
    scan_opts(p)
    common(p)
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser("table1", help="max errors of the truncated series over the alpha grid")
    p.add_argument("--eps-list", type=float, nargs="+")
    p.add_argument("--alpha-steps", type=int)
    scan_opts(p)
    common(p, formats=("csv", "json", "text"))
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("simulate", help="integrate the slow flow or the full system")
    p.add_argument("--system", choices=("slow", "full"), default="slow")
    p.add_argument("--alpha", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--beta", type=int, choices=(-1, 1), default=-1)
    p.add_argument("--perturbation", type=float, nargs=2, default=(0.01, 0.0),
                   metavar=("DX", "DV"), help="offset added to oscillator 1's history")
    p.add_argument("--seed", type=int, help="randomize the initial history deterministically")
    p.add_argument("--step", type=float)
    p.add_argument("--window", type=float, help="integration length")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("hopf", help="Hopf point from the series and from Newton refinement")
    p.add_argument("--alpha", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--n-terms", type=int, choices=(1, 2, 3))
    common(p)
    p.set_defaults(func=cmd_hopf)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"delayvdp {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"delayvdp {args.command}: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DelayVdpError as exc:
        print(f"delayvdp {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
