"""Fixed-step method-of-steps integration for single-delay DDEs.

Each step is classical RK4. The step is chosen so that an integer number
``m >= 4`` of steps spans one delay; the delayed argument at a stage then
falls on a stored node or on the midpoint of a completed step, where it is
read off the cubic Hermite interpolant built from stored states and
derivatives. With ``delay = 0`` the scheme is plain RK4.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NonFiniteState
from .model_core import Params, in_phase_mode

__all__ = [
    "DdeProblem",
    "Trajectory",
    "integrate",
    "effective_step",
    "slow_flow_rhs",
    "full_system_rhs",
]


@dataclass
class DdeProblem:
    """``y'(t) = rhs(t, y(t), y(t - delay))`` with ``y = history(t)`` for ``t <= t0``.

    ``linear = (M0, M1)`` declares that ``rhs`` is exactly
    ``M0 @ y + M1 @ y_delayed``; :func:`integrate` then advances a whole
    delay interval per vectorized block instead of one step at a time.
    """

    dim: int
    delay: float
    rhs: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    history: Callable[[float], np.ndarray]
    t0: float = 0.0
    labels: Optional[Sequence[str]] = None
    linear: Optional[tuple] = None

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError(f"delay must be >= 0, got {self.delay}")
        if self.labels is None:
            self.labels = tuple(f"y{i}" for i in range(self.dim))


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled solution with stored derivatives.

    ``eval`` is the C1 piecewise-cubic Hermite interpolant of the nodes.
    """

    t0: float
    h: float
    y: np.ndarray
    f: np.ndarray
    labels: Sequence[str] = field(default=())

    def __post_init__(self):
        self.y.setflags(write=False)
        self.f.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.y.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.y.shape[0]

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n_nodes)

    @property
    def t_end(self) -> float:
        return self.t0 + self.h * (self.n_nodes - 1)

    def eval(self, t) -> np.ndarray:
        """Hermite interpolation at ``t`` (scalar or 1-d array) inside the span."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        s = (t_arr - self.t0) / self.h
        r = np.rint(s)
        s = np.where(np.abs(s - r) < 1e-9, r, s)
        if np.any(s < -1e-9) or np.any(s > self.n_nodes - 1 + 1e-9):
            raise ValueError("evaluation time outside the trajectory span")
        i = np.clip(np.floor(s).astype(int), 0, self.n_nodes - 2)
        th = (s - i)[:, None]
        y0, y1 = self.y[i], self.y[i + 1]
        f0, f1 = self.f[i], self.f[i + 1]
        h00 = (1 + 2 * th) * (1 - th) ** 2
        h10 = th * (1 - th) ** 2
        h01 = th * th * (3 - 2 * th)
        h11 = th * th * (th - 1)
        out = h00 * y0 + h10 * self.h * f0 + h01 * y1 + h11 * self.h * f1
        return out[0] if np.ndim(t) == 0 else out

    def to_csv(self, path=None) -> str:
        """Write ``t,<labels...>`` rows with 15 significant digits.

        Returns the CSV text; also writes it to ``path`` when given.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *self.labels])
        for ti, row in zip(self.t, self.y):
            w.writerow([f"{ti:.15g}", *(f"{v:.15g}" for v in row)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def effective_step(delay: float, h: float) -> tuple[float, int]:
    """Step actually used and the number of steps per delay (0 if no delay)."""
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    if delay == 0:
        return h, 0
    m = max(4, math.ceil(delay / h - 1e-9))
    return delay / m, m


def integrate(prob: DdeProblem, t_end: float, h: float = 0.01) -> Trajectory:
    """Integrate ``prob`` from ``prob.t0`` to (at least) ``t_end``.

    Raises
    ------
    NonFiniteState
        If the state stops being finite. The exception carries the partial
        trajectory and the blow-up time.
    """
    if t_end <= prob.t0:
        raise ValueError("t_end must exceed t0")
    h, m = effective_step(prob.delay, h)
    n = math.ceil((t_end - prob.t0) / h - 1e-9)
    t0, rhs, hist = prob.t0, prob.rhs, prob.history
    Y = np.empty((n + 1, prob.dim))
    F = np.empty((n + 1, prob.dim))

    def lag(i, c):
        # delayed state for stage time t_i + c h, as an index offset into the past
        j = i - m
        if j + c <= 0:
            return np.asarray(hist(t0 + (j + c) * h), dtype=float)
        if c == 0.0:
            return Y[j]
        if c == 1.0:
            return Y[j + 1]
        return 0.5 * (Y[j] + Y[j + 1]) + 0.125 * h * (F[j] - F[j + 1])

    Y[0] = hist(t0)
    if m == 0:
        F[0] = rhs(t0, Y[0], Y[0])
    else:
        F[0] = rhs(t0, Y[0], lag(0, 0.0))

    with np.errstate(over="ignore", invalid="ignore"):
        if prob.linear is not None and m == 0:
            M = np.asarray(prob.linear[0], dtype=float) + np.asarray(prob.linear[1], dtype=float)
            P = _rk4_maps(M, np.zeros_like(M), h)[0]
            _linear_ode(Y, F, n, t0, h, M, P, prob.labels)
        elif prob.linear is not None:
            _linear_blocks(Y, F, n, m, t0, h, prob.linear, hist, prob.labels)
        else:
            _steps(Y, F, n, m, t0, h, rhs, lag, prob.labels)
    return Trajectory(t0, h, Y, F, tuple(prob.labels))


def _rk4_maps(M0, M1, h):
    """Matrices with ``y_next = P y + Q0 d(t) + Qm d(t + h/2) + Q1 d(t + h)`` for one RK4 step."""
    def step(y, d0, dm, d1):
        k1 = M0 @ y + M1 @ d0
        k2 = M0 @ (y + 0.5 * h * k1) + M1 @ dm
        k3 = M0 @ (y + 0.5 * h * k2) + M1 @ dm
        k4 = M0 @ (y + h * k3) + M1 @ d1
        return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    eye, zero = np.eye(M0.shape[0]), np.zeros_like(M0)
    return (step(eye, zero, zero, zero), step(zero, eye, zero, zero),
            step(zero, zero, eye, zero), step(zero, zero, zero, eye))


def _linear_ode(Y, F, n, t0, h, M, P, labels):
    y = Y[0]
    for i in range(n):
        y = P @ y
        Y[i + 1] = y
    F[:] = Y @ M.T
    bad = ~np.isfinite(Y).all(axis=1)
    if bad.any():
        k = int(np.argmax(bad))
        partial = Trajectory(t0, h, Y[:k].copy(), F[:k].copy(), tuple(labels))
        raise NonFiniteState(
            f"non-finite state at t={t0 + k * h:.6g}", trajectory=partial, t_blowup=t0 + k * h
        )


def _linear_blocks(Y, F, n, m, t0, h, linear, hist, labels):
    M0, M1 = (np.asarray(M, dtype=float) for M in linear)
    P, Q0, Qm, Q1 = _rk4_maps(M0, M1, h)

    def delayed_nodes(k):
        # y(t_k - delay) for node indices k (array)
        out = np.empty((k.size, Y.shape[1]))
        past = k - m <= 0
        for r in np.nonzero(past)[0]:
            out[r] = hist(t0 + (k[r] - m) * h)
        out[~past] = Y[k[~past] - m]
        return out

    F[0] = M0 @ Y[0] + M1 @ delayed_nodes(np.array([0]))[0]
    b = 0
    while b < n:
        e = min(b + m, n)
        i = np.arange(b, e)
        j = i - m
        d0 = delayed_nodes(i)
        d1 = delayed_nodes(i + 1)
        dm = np.empty_like(d0)
        past = j < 0
        for r in np.nonzero(past)[0]:
            dm[r] = hist(t0 + (j[r] + 0.5) * h)
        jj = j[~past]
        dm[~past] = 0.5 * (Y[jj] + Y[jj + 1]) + 0.125 * h * (F[jj] - F[jj + 1])
        g = d0 @ Q0.T + dm @ Qm.T + d1 @ Q1.T
        y = Y[b]
        for r in range(e - b):
            y = P @ y + g[r]
            Y[b + r + 1] = y
        F[b + 1 : e + 1] = Y[b + 1 : e + 1] @ M0.T + d1 @ M1.T
        bad = ~np.isfinite(Y[b + 1 : e + 1]).all(axis=1)
        if bad.any():
            k = b + 1 + int(np.argmax(bad))
            partial = Trajectory(t0, h, Y[:k].copy(), F[:k].copy(), tuple(labels))
            raise NonFiniteState(
                f"non-finite state at t={t0 + k * h:.6g}", trajectory=partial, t_blowup=t0 + k * h
            )
        b = e


def _steps(Y, F, n, m, t0, h, rhs, lag, labels):
    h2 = 0.5 * h
    for i in range(n):
        ti = t0 + i * h
        y = Y[i]
        k1 = F[i]
        if m == 0:
            ya = y + h2 * k1
            k2 = rhs(ti + h2, ya, ya)
            yb = y + h2 * k2
            k3 = rhs(ti + h2, yb, yb)
            yc = y + h * k3
            k4 = rhs(ti + h, yc, yc)
        else:
            dmid = lag(i, 0.5)
            k2 = rhs(ti + h2, y + h2 * k1, dmid)
            k3 = rhs(ti + h2, y + h2 * k2, dmid)
            k4 = rhs(ti + h, y + h * k3, lag(i, 1.0))
        y_new = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(y_new).all():
            partial = Trajectory(t0, h, Y[: i + 1].copy(), F[: i + 1].copy(), tuple(labels))
            raise NonFiniteState(
                f"non-finite state at t={ti + h:.6g}", trajectory=partial, t_blowup=ti + h
            )
        Y[i + 1] = y_new
        F[i + 1] = rhs(ti + h, y_new, y_new if m == 0 else lag(i + 1, 0.0))
        if not np.isfinite(F[i + 1]).all():
            partial = Trajectory(t0, h, Y[: i + 1].copy(), F[: i + 1].copy(), tuple(labels))
            raise NonFiniteState(
                f"non-finite derivative at t={ti + h:.6g}", trajectory=partial, t_blowup=ti + h
            )


def _constant_history(state):
    state = np.array(state, dtype=float)
    state.setflags(write=False)
    return lambda t: state


def slow_flow_rhs(p: Params, initial=(1.0, 0.0), history=None) -> DdeProblem:
    """Delayed slow flow on (A, B) in slow time ``eta = eps t``.

    The lag is ``eps T``. ``history`` defaults to the constant ``initial``.
    """
    a, b = p.alpha, p.beta
    c, s = math.cos(p.T), math.sin(p.T)
    # current-state and delayed-state coefficient matrices
    m0 = np.array([[-1.0 - 1.5 * a * c, 0.5 * a * s], [-0.5 * a * s, -0.5 * a * c]])
    m1 = 0.5 * a * b * np.array([[c, -s], [s, c]])

    def rhs(t, y, yd):
        return m0 @ y + m1 @ yd

    if history is None:
        history = _constant_history(initial)
    return DdeProblem(dim=2, delay=p.eps * p.T, rhs=rhs, history=history, labels=("A", "B"),
                      linear=(m0, m1))


def full_system_rhs(p: Params, perturbation=(0.0, 0.0)) -> DdeProblem:
    """Both oscillators in fast time ``t`` with lag ``T``.

    State is ``(x1, v1, x2, v2)``. The history is the in-phase approximation
    ``y = R cos(omega t)`` on both oscillators, with ``perturbation``
    (a constant ``(dx, dv)``) added to oscillator 1 only.
    """
    mode = in_phase_mode(p)
    R, w = mode.R, mode.omega
    eps, ea = p.eps, p.eps * p.alpha
    dx, dv = (float(v) for v in perturbation)

    def rhs(t, y, yd):
        x1, v1, x2, v2 = y
        return np.array(
            [
                v1,
                -x1 + eps * (1.0 - x1 * x1) * v1 + ea * yd[3],
                v2,
                -x2 + eps * (1.0 - x2 * x2) * v2 + ea * yd[1],
            ]
        )

    def history(t):
        yv = R * math.cos(w * t)
        vv = -R * w * math.sin(w * t)
        return np.array([yv + dx, vv + dv, yv, vv])

    return DdeProblem(
        dim=4, delay=p.T, rhs=rhs, history=history, labels=("x1", "v1", "x2", "v2")
    )
