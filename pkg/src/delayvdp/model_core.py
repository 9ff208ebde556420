"""Closed-form quantities for two delay-coupled van der Pol oscillators.

The system is

    x1'' + x1 - eps (1 - x1^2) x1' = eps alpha x2'(t - T)
    x2'' + x2 - eps (1 - x2^2) x2' = eps alpha x1'(t - T)

This module holds the in-phase periodic mode found by Lindstedt's method,
the 2x2 slow-flow matrix obtained when the delayed slow variables are
replaced by current ones, and the bifurcation curves of that ODE slow flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ModeNonexistent, NotAHopf, OutOfDomain

__all__ = [
    "Params",
    "InPhaseMode",
    "SlowFlowMatrix",
    "in_phase_mode",
    "ode_slow_flow_matrix",
    "hopf_curve_ode",
    "saddle_node_curve",
    "mode_birth_curve",
    "lindstedt_residual",
    "ALPHA_INTERSECTION",
    "T_INTERSECTION",
]

#: Point where the ODE Hopf curve meets the nontrivial saddle-node curve.
ALPHA_INTERSECTION = math.sqrt(2.0) / 3.0
T_INTERSECTION = 3.0 * math.pi / 4.0

#: Round-off allowance on the determinant at the degenerate Hopf endpoint.
DET_TOL = 1e-12


@dataclass(frozen=True)
class Params:
    """Physical parameters plus the perturbation channel.

    ``beta = +1`` selects the symmetric deviation w1 + w2, ``beta = -1`` the
    anti-symmetric one w1 - w2.
    """

    alpha: float
    T: float
    eps: float = 0.0
    beta: int = -1

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and np.isfinite(self.T) and np.isfinite(self.eps)):
            raise ValueError("Params fields must be finite")
        if self.eps < 0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")
        if self.T < 0:
            raise ValueError(f"T must be >= 0, got {self.T}")
        if self.beta not in (1, -1):
            raise ValueError(f"beta must be +1 or -1, got {self.beta}")


@dataclass(frozen=True)
class InPhaseMode:
    R: float
    omega: float
    k: float


@dataclass(frozen=True)
class SlowFlowMatrix:
    m11: float
    m12: float
    m21: float
    m22: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    @property
    def trace(self) -> float:
        return self.m11 + self.m22

    @property
    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m21


def in_phase_mode(p: Params) -> InPhaseMode:
    """Lindstedt approximation ``y = R cos(omega t)`` of the in-phase mode.

    Raises
    ------
    ModeNonexistent
        If ``1 + alpha cos T <= 0`` (to within round-off, ``DET_TOL``).
    """
    s = 1.0 + p.alpha * math.cos(p.T)
    if s <= DET_TOL:
        raise ModeNonexistent(
            f"1 + alpha cos T = {s:.3g} <= 0 at alpha={p.alpha}, T={p.T}"
        )
    k = -0.5 * p.alpha * math.sin(p.T)
    return InPhaseMode(R=2.0 * math.sqrt(s), omega=1.0 + p.eps * k, k=k)


def ode_slow_flow_matrix(p: Params) -> SlowFlowMatrix:
    """Matrix of the slow flow on (A, B) with A_d = A and B_d = B."""
    a, b = p.alpha, p.beta
    c, s = math.cos(p.T), math.sin(p.T)
    return SlowFlowMatrix(
        m11=-1.0 + 0.5 * a * (b - 3) * c,
        m12=0.5 * a * (1 - b) * s,
        m21=-0.5 * a * (1 - b) * s,
        m22=-0.5 * a * (1 - b) * c,
    )


def _branch(theta: float, branch: int) -> float:
    # even index: theta + 2 pi j; odd index: mirror image 2 pi j - theta
    if branch < 0:
        raise ValueError("branch index must be >= 0")
    if branch % 2 == 0:
        return theta + 2.0 * math.pi * (branch // 2)
    return 2.0 * math.pi * ((branch + 1) // 2) - theta


def hopf_curve_ode(alpha: float, branch: int = 0, require_hopf: bool = True) -> float:
    """Delay at which the ODE slow flow (beta = -1) has zero trace.

    Returns ``arccos(-1 / (3 alpha))``. On this curve the determinant equals
    ``alpha^2 - 2/9``, so the zero-trace point is a Hopf point only for
    ``alpha >= sqrt(2)/3``. With ``require_hopf`` (default) a negative
    determinant raises :class:`NotAHopf`; the degenerate endpoint
    ``alpha = sqrt(2)/3`` (determinant zero up to round-off) is accepted.
    Pass ``require_hopf=False`` to get the bare zero-trace curve.
    """
    if alpha < 1.0 / 3.0:
        raise OutOfDomain(f"Hopf curve requires alpha >= 1/3, got {alpha}")
    c = max(-1.0, -1.0 / (3.0 * alpha))
    T = _branch(math.acos(c), branch)
    det = ode_slow_flow_matrix(Params(alpha, T)).det
    if require_hopf and det < -DET_TOL:
        raise NotAHopf(f"determinant {det:.3g} <= 0 at alpha={alpha}, T={T}")
    return T


def saddle_node_curve(alpha: float, branch: int = 0) -> float:
    """Delay on the curve ``alpha = -cos T / (1 + cos^2 T)``.

    Solved as ``alpha c^2 + c + alpha = 0`` for ``c = cos T``; the root with
    ``|c| <= 1`` is ``c = (-1 + sqrt(1 - 4 alpha^2)) / (2 alpha)``.
    """
    if not 0.0 < alpha <= 0.5:
        raise OutOfDomain(f"saddle-node curve requires 0 < alpha <= 1/2, got {alpha}")
    disc = max(0.0, 1.0 - 4.0 * alpha * alpha)
    # rationalized form avoids cancellation for small alpha
    c = -2.0 * alpha / (1.0 + math.sqrt(disc))
    return _branch(math.acos(max(-1.0, c)), branch)


def mode_birth_curve(alpha: float, branch: int = 0) -> float:
    """Delay at which the in-phase mode is born, ``cos T = -1/alpha``."""
    if alpha < 1.0:
        raise OutOfDomain(f"mode-birth curve requires alpha >= 1, got {alpha}")
    return _branch(math.acos(max(-1.0, -1.0 / alpha)), branch)


def lindstedt_residual(p: Params, t, order: int = 0) -> np.ndarray:
    """Residual of the in-phase equation for the Lindstedt approximation.

    Evaluates ``y'' + y - eps (1 - y^2) y' - eps alpha y'(t - T)`` with
    ``y = R cos(omega t)`` (``order=0``) or with the first-order correction
    ``- eps R^3/32 sin(3 omega t)`` added (``order=1``).
    """
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    mode = in_phase_mode(p)
    R, w, eps = mode.R, mode.omega, p.eps
    c3 = eps * R**3 / 32.0 if order == 1 else 0.0

    def y(s):
        th = w * s
        return R * np.cos(th) - c3 * np.sin(3 * th)

    def dy(s):
        th = w * s
        return -R * w * np.sin(th) - 3 * w * c3 * np.cos(3 * th)

    def d2y(s):
        th = w * s
        return -R * w * w * np.cos(th) + 9 * w * w * c3 * np.sin(3 * th)

    t = np.asarray(t, dtype=float)
    yt = y(t)
    return d2y(t) + yt - eps * (1.0 - yt**2) * dy(t) - eps * p.alpha * dy(t - p.T)
