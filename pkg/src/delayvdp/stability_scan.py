"""Simulation-based location of the Hopf delay and comparison with the series.

A delayed slow-flow run is classified as growing or decaying from the
slope of its log-amplitude over the trailing half of the run. Bisection on
T between a decaying and a growing run gives the simulated critical delay
``T_sim``. Sweeping alpha and comparing ``T_sim`` with the truncated series
gives the absolute, relative and percent error columns.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .dde_engine import Trajectory, integrate, slow_flow_rhs
from .errors import DelayVdpError, NonFiniteState, NoSignChange, TooShort
from .model_core import ALPHA_INTERSECTION, Params
from .spectral import hopf_newton, hopf_series

__all__ = [
    "GrowthEstimate",
    "ScanConfig",
    "ScanResult",
    "ErrorTable",
    "growth_rate",
    "probe_growth",
    "critical_delay",
    "default_alpha_grid",
    "sweep",
    "error_table",
    "TABLE1_EPS",
    "TABLE1_N",
]

TABLE1_EPS = (0.1, 0.3, 0.5)
TABLE1_N = (1, 2, 3)


@dataclass(frozen=True)
class GrowthEstimate:
    rate: float
    r_squared: float
    window: tuple
    method: str = "lsq"


@dataclass(frozen=True)
class ScanConfig:
    """Integration and bisection settings shared by every probe."""

    window: float = 60.0
    h: float = 0.01
    tol: float = 1e-3
    bracket: float = 0.4
    initial: tuple = (1.0, 0.0)
    fit: str = "envelope"
    # oscillation periods wanted inside the fitted (second) half of a run
    min_cycles: float = 2.0
    max_window: float = 1000.0

    def window_for(self, omega: Optional[float] = None) -> float:
        """Run length long enough to hold ``min_cycles`` periods of ``omega`` in its second half."""
        if omega is None or not np.isfinite(omega) or omega == 0.0:
            return self.window
        need = 2.0 * self.min_cycles * 2.0 * math.pi / abs(omega)
        return min(self.max_window, max(self.window, need))


def _lsq(t, v):
    A = np.vstack([t, np.ones_like(t)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, v, rcond=None)
    resid = v - (slope * t + icpt)
    ss_tot = float(np.sum((v - v.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)
    return float(slope), min(1.0, r2)


def _peaks(t, v):
    """Local maxima of ``v`` refined by a parabola through three samples."""
    idx = np.nonzero((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]))[0] + 1
    if idx.size == 0:
        return np.empty(0), np.empty(0)
    a, b, c = v[idx - 1], v[idx], v[idx + 1]
    den = a - 2 * b + c
    with np.errstate(divide="ignore", invalid="ignore"):
        off = np.where(den != 0, 0.5 * (a - c) / den, 0.0)
    dt = t[1] - t[0]
    return t[idx] + off * dt, b - 0.25 * (a - c) * off


def growth_rate(traj: Trajectory, fit: str = "envelope", min_span: float = 40.0,
                min_nodes: int = 200) -> GrowthEstimate:
    """Exponential growth rate of ``||y||_2`` over the second half of ``traj``.

    ``fit="lsq"`` regresses ``ln||y||`` on time directly. ``fit="envelope"``
    (default) regresses the log of the successive local maxima of ``||y||``,
    which removes the bias an oscillating norm puts on a plain fit; it falls
    back to ``"lsq"`` when fewer than three maxima are present (non-oscillatory
    runs).
    """
    span = traj.t_end - traj.t0
    if span < min_span or traj.n_nodes < min_nodes:
        raise TooShort(
            f"need span >= {min_span} and >= {min_nodes} nodes, "
            f"got span {span:.3g} with {traj.n_nodes} nodes"
        )
    t = traj.t
    keep = t >= traj.t0 + 0.5 * span
    t = t[keep]
    with np.errstate(divide="ignore"):
        v = np.log(np.linalg.norm(traj.y[keep], axis=1))
    window = (float(t[0]), float(t[-1]))
    if not np.all(np.isfinite(v)):
        # exact zero norm: the trajectory has collapsed onto the origin
        return GrowthEstimate(-math.inf, 1.0, window, fit)
    if fit == "envelope":
        tp, vp = _peaks(t, v)
        if tp.size >= 3:
            rate, r2 = _lsq(tp, vp)
            return GrowthEstimate(rate, r2, window, "envelope")
    elif fit != "lsq":
        raise ValueError(f"unknown fit {fit!r}")
    rate, r2 = _lsq(t, v)
    return GrowthEstimate(rate, r2, window, "lsq")


def probe_growth(p: Params, cfg: ScanConfig = ScanConfig(), initial=None,
                 window: Optional[float] = None) -> GrowthEstimate:
    """Integrate the delayed slow flow at ``p`` and fit its growth rate.

    A run that blows up is reported with ``rate = +inf``.
    """
    prob = slow_flow_rhs(p, initial=cfg.initial if initial is None else initial)
    try:
        traj = integrate(prob, cfg.window if window is None else window, cfg.h)
    except NonFiniteState as exc:
        return GrowthEstimate(math.inf, float("nan"), (0.0, exc.t_blowup), "blowup")
    return growth_rate(traj, fit=cfg.fit)


def critical_delay(alpha: float, eps: float, T_lo: float, T_hi: float,
                   tol: Optional[float] = None, cfg: ScanConfig = ScanConfig(),
                   beta: int = -1, omega_hint: Optional[float] = None) -> float:
    """Bisect on T for the change in sign of the slow-flow growth rate.

    Returns the midpoint of the final bracket once its width is below
    ``tol`` (``cfg.tol`` by default). ``omega_hint``, the expected Hopf
    frequency, lengthens the runs when a slow oscillation would not fit in
    ``cfg.window``.
    """
    tol = cfg.tol if tol is None else tol
    if tol <= 0:
        raise ValueError("tol must be positive")
    window = cfg.window_for(omega_hint)

    def sign(T):
        return np.sign(probe_growth(Params(alpha, T, eps, beta), cfg, window=window).rate)

    s_lo, s_hi = sign(T_lo), sign(T_hi)
    if s_lo == s_hi or s_lo == 0 or s_hi == 0:
        raise NoSignChange(
            f"growth rate has sign {s_lo:+.0f} at T={T_lo:.6g} and {s_hi:+.0f} at T={T_hi:.6g}"
        )
    lo, hi = T_lo, T_hi
    while abs(hi - lo) >= tol:
        mid = 0.5 * (lo + hi)
        s = sign(mid)
        if s == s_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def default_alpha_grid(n: int = 20, a_min: float = ALPHA_INTERSECTION, a_max: float = 1.0,
                       nudge: float = 1e-3) -> np.ndarray:
    """Uniform grid on ``[a_min, a_max]``; a left endpoint at the degenerate point is nudged right."""
    grid = np.linspace(a_min, a_max, n)
    if abs(grid[0] - ALPHA_INTERSECTION) < 1e-12:
        grid[0] += nudge
    return grid


@dataclass
class ScanResult:
    alpha: float
    eps: float
    T_sim: float = math.nan
    T_series: tuple = (math.nan, math.nan, math.nan)
    T_newton: float = math.nan
    abs_err: tuple = (math.nan, math.nan, math.nan)
    rel_err: tuple = (math.nan, math.nan, math.nan)
    pct_err: tuple = (math.nan, math.nan, math.nan)
    error: Optional[str] = None

    CSV_FIELDS = (
        "alpha", "eps", "T_sim", "T_s1", "T_s2", "T_s3", "T_newton",
        "abs1", "abs2", "abs3", "rel1", "rel2", "rel3", "pct1", "pct2", "pct3", "error",
    )

    def row(self) -> list:
        return [self.alpha, self.eps, self.T_sim, *self.T_series, self.T_newton,
                *self.abs_err, *self.rel_err, *self.pct_err, self.error or ""]


def _scan_point(alpha: float, eps: float, cfg: ScanConfig, newton: bool = True) -> ScanResult:
    res = ScanResult(alpha=float(alpha), eps=float(eps))
    problems = []
    try:
        res.T_series = tuple(hopf_series(alpha, eps, n).T for n in (1, 2, 3))
    except DelayVdpError as exc:
        res.error = f"series: {exc}"
        return res
    omega = hopf_series(alpha, 0.0, 1).Omega
    if newton:
        try:
            hp = hopf_newton(alpha, eps, hopf_series(alpha, eps, 3))
        except DelayVdpError as exc:
            problems.append(f"newton: {exc}")
        else:
            res.T_newton, omega = hp.T, hp.Omega
    T3 = res.T_series[2]
    try:
        res.T_sim = critical_delay(alpha, eps, max(0.0, T3 - cfg.bracket), T3 + cfg.bracket,
                                   cfg=cfg, omega_hint=omega)
    except DelayVdpError as exc:
        problems.append(f"simulation: {exc}")
    else:
        ab = tuple(abs(res.T_sim - Tn) for Tn in res.T_series)
        res.abs_err = ab
        res.rel_err = tuple(a / abs(res.T_sim) for a in ab)
        res.pct_err = tuple(100.0 * r for r in res.rel_err)
    res.error = "; ".join(problems) or None
    return res


def sweep(alpha_grid: Iterable[float], eps: float, cfg: ScanConfig = ScanConfig(),
          newton: bool = True) -> list:
    """Series, Newton and simulated critical delays at each alpha.

    Failures at a grid point are recorded in ``ScanResult.error``; the sweep
    carries on.
    """
    return [_scan_point(a, eps, cfg, newton) for a in alpha_grid]


def results_to_csv(results: Sequence[ScanResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ScanResult.CSV_FIELDS)
    for r in results:
        w.writerow([_fmt(v) for v in r.row()])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, str):
        return v
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.15g}"


@dataclass
class ErrorTable:
    """Maximum errors over an alpha grid, keyed by ``(eps, n)``."""

    cells: dict = field(default_factory=dict)
    sweeps: dict = field(default_factory=dict)

    def cell(self, eps: float, n: int) -> dict:
        return self.cells[(eps, n)]

    def records(self) -> list:
        return [{"eps": e, "n": n, **c} for (e, n), c in sorted(self.cells.items())]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "n", "abs", "rel", "pct", "alpha_at_max"])
        for r in self.records():
            w.writerow([_fmt(float(r["eps"])), r["n"], _fmt(r["abs"]), _fmt(r["rel"]),
                        _fmt(r["pct"]), _fmt(r["alpha_at_max"])])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.records(), indent=2, allow_nan=True)

    def to_text(self) -> str:
        eps_vals = sorted({e for e, _ in self.cells})
        n_vals = sorted({n for _, n in self.cells})
        head = ["".ljust(16)] + [f"eps={e:g} n={n}".rjust(14) for e in eps_vals for n in n_vals]
        lines = ["".join(head)]
        for key, fmt in (("abs", "{:.4f}"), ("rel", "{:.4f}"), ("pct", "{:.2f}%")):
            cells = [fmt.format(self.cells[(e, n)][key]).rjust(14) for e in eps_vals for n in n_vals]
            lines.append(f"{key + ' error':<16}" + "".join(cells))
        return "\n".join(lines) + "\n"


def error_table(eps_list: Sequence[float] = TABLE1_EPS, n_list: Sequence[int] = TABLE1_N,
                grid_size: int = 20, cfg: ScanConfig = ScanConfig(),
                alpha_grid: Optional[Sequence[float]] = None, newton: bool = True) -> ErrorTable:
    """Max over the alpha grid of absolute/relative/percent error per ``(eps, n)``.

    Grid points whose simulation failed are skipped.
    """
    grid = default_alpha_grid(grid_size) if alpha_grid is None else np.asarray(alpha_grid)
    table = ErrorTable()
    for eps in eps_list:
        results = sweep(grid, eps, cfg, newton)
        table.sweeps[eps] = results
        ok = [r for r in results if np.isfinite(r.T_sim)]
        for n in n_list:
            if not ok:
                table.cells[(eps, n)] = dict(abs=math.nan, rel=math.nan, pct=math.nan,
                                             alpha_at_max=math.nan)
                continue
            k = n - 1
            worst = max(ok, key=lambda r: r.abs_err[k])
            table.cells[(eps, n)] = dict(
                abs=max(r.abs_err[k] for r in ok),
                rel=max(r.rel_err[k] for r in ok),
                pct=max(r.pct_err[k] for r in ok),
                alpha_at_max=worst.alpha,
            )
    return table
