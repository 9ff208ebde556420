"""Characteristic equation of the delayed slow flow and its Hopf points.

With ``A = P exp(lambda eta)`` and ``B = Q exp(lambda eta)`` the delayed
slow flow (beta = -1) has nontrivial solutions when a transcendental
determinant vanishes. A Hopf point is a pair (T, Omega) where
``lambda = i Omega`` is a root. Two routes to it are provided: the
three-term perturbation series in eps and a Newton iteration on the
real and imaginary parts of the determinant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateHopf,
    NoConvergence,
    OutOfDomain,
    SingularJacobian,
    UnsupportedMode,
)
from .model_core import ALPHA_INTERSECTION, Params

__all__ = [
    "SeriesCoeffs",
    "HopfPoint",
    "char_eq",
    "series_coeffs",
    "hopf_series",
    "hopf_newton",
    "METHODS",
]

METHODS = ("series_n1", "series_n2", "series_n3", "newton", "simulation")

# accept alpha a few ulps below sqrt(2)/3 so the exact endpoint is usable
_ALPHA_MIN = ALPHA_INTERSECTION * (1.0 - 1e-14)


@dataclass(frozen=True)
class SeriesCoeffs:
    """Coefficients of ``T = T0 + eps T1 + eps^2 T2`` and the matching Omega series."""

    alpha: float
    T0: float
    T1: float
    T2: float
    Omega0: float
    Omega1: float
    Omega2: float

    def T(self, eps: float, n_terms: int = 3) -> float:
        return sum(c * eps**k for k, c in enumerate((self.T0, self.T1, self.T2)[:n_terms]))

    def Omega(self, eps: float, n_terms: int = 3) -> float:
        return sum(
            c * eps**k for k, c in enumerate((self.Omega0, self.Omega1, self.Omega2)[:n_terms])
        )


@dataclass(frozen=True)
class HopfPoint:
    alpha: float
    T: float
    Omega: float
    method: str
    eps: float = float("nan")
    residual: float = float("nan")
    iterations: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")


def _char_eq(lam, alpha, T, eps):
    E = np.exp(-eps * T * lam)
    c = math.cos(T)
    s2 = math.sin(T) ** 2
    a2 = alpha * alpha
    return (
        alpha * c * lam * E
        - 0.5 * a2 * s2 * E
        + 0.5 * alpha * c * E
        + a2 * E
        + 0.25 * a2 * E * E
        + lam * lam
        + 2.0 * alpha * c * lam
        + lam
        - 0.5 * a2 * s2
        + 0.5 * alpha * c
        + 0.75 * a2
    )


def char_eq(lam, p: Params):
    """Left-hand side of the characteristic equation at ``lam``.

    ``lam`` may be a Python complex or a numpy array. Only the
    anti-symmetric channel ``beta = -1`` is supported.
    """
    if p.beta != -1:
        raise UnsupportedMode("characteristic equation is implemented for beta = -1 only")
    return _char_eq(lam, p.alpha, p.T, p.eps)


def series_coeffs(alpha: float) -> SeriesCoeffs:
    """Perturbation coefficients of the critical delay and Hopf frequency.

    Valid for ``alpha >= sqrt(2)/3``; at the endpoint ``Omega0 = 0`` and the
    terms with ``sqrt(9 alpha^2 - 2)`` in the denominator are infinite.
    """
    if not alpha >= _ALPHA_MIN:
        raise OutOfDomain(f"series requires alpha >= sqrt(2)/3, got {alpha}")
    a2 = alpha * alpha
    r2 = math.sqrt(max(0.0, 9.0 * a2 - 2.0))
    r1 = math.sqrt(9.0 * a2 - 1.0)
    T0 = math.acos(-1.0 / (3.0 * alpha))
    T1 = -r1 * T0 / 9.0
    T2 = (r1 * (27.0 * a2 - 6.0) * T0**2 + (162.0 * a2 * a2 - 36.0 * a2 + 2.0) * T0) / (
        1458.0 * a2 - 162.0
    )
    O0 = r2 / 3.0
    with np.errstate(divide="ignore", invalid="ignore"):
        O1 = float(-np.float64((18.0 * a2 - 5.0) * T0) / np.float64(54.0 * r2))
    poly6 = -8019.0 * a2**3 + 5346.0 * a2**2 - 1206.0 * a2 + 91.0
    poly4 = 648.0 * a2**2 - 324.0 * a2 + 40.0
    O2 = r2 * (poly6 * T0**2 + r1 * poly4 * T0) / (157464.0 * a2**2 - 69984.0 * a2 + 7776.0)
    return SeriesCoeffs(alpha, T0, T1, T2, O0, O1, O2)


def hopf_series(alpha: float, eps: float, n_terms: int = 3) -> HopfPoint:
    """Critical delay from the ``n_terms``-term truncation of the eps series."""
    if n_terms not in (1, 2, 3):
        raise ValueError(f"n_terms must be 1, 2 or 3, got {n_terms}")
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    sc = series_coeffs(alpha)
    if eps == 0.0:
        T, Om = sc.T0, sc.Omega0
    else:
        T, Om = sc.T(eps, n_terms), sc.Omega(eps, n_terms)
    return HopfPoint(alpha, T, Om, f"series_n{n_terms}", eps=eps)


def _residual(x, alpha, eps):
    v = _char_eq(1j * x[1], alpha, x[0], eps)
    return np.array([v.real, v.imag])


def hopf_newton(
    alpha: float,
    eps: float,
    seed,
    max_iter: int = 50,
    newton_tol: float = 1e-12,
    fd_step: float = 1e-6,
) -> HopfPoint:
    """Refine a Hopf point by Newton's method on (T, Omega).

    Solves ``Re D(i Omega) = Im D(i Omega) = 0`` for the characteristic
    function ``D`` at fixed ``alpha`` and ``eps``. The Jacobian is built by
    central differences with step ``fd_step``.

    Parameters
    ----------
    seed : HopfPoint or (T, Omega) pair
        Starting guess, typically ``hopf_series(alpha, eps, 3)``.

    Raises
    ------
    DegenerateHopf
        If the seed frequency is below 1e-6 in magnitude.
    SingularJacobian
        If the Jacobian determinant falls below 1e-14 in magnitude.
    NoConvergence
        If the residual is not below ``newton_tol`` after ``max_iter`` steps.
    """
    if newton_tol <= 0:
        raise ValueError("newton_tol must be positive")
    T, Om = (seed.T, seed.Omega) if isinstance(seed, HopfPoint) else seed
    if not (np.isfinite(T) and np.isfinite(Om)):
        raise ValueError("seed must be finite")
    if abs(Om) < 1e-6:
        raise DegenerateHopf(f"seed frequency {Om:.3g} too close to zero")

    x = np.array([T, Om], dtype=float)
    F = _residual(x, alpha, eps)
    for it in range(max_iter + 1):
        if np.max(np.abs(F)) < newton_tol:
            return HopfPoint(
                alpha, float(x[0]), float(x[1]), "newton",
                eps=eps, residual=float(np.hypot(*F)), iterations=it,
            )
        if it == max_iter:
            break
        J = np.empty((2, 2))
        for j in range(2):
            dx = np.zeros(2)
            dx[j] = fd_step
            J[:, j] = (_residual(x + dx, alpha, eps) - _residual(x - dx, alpha, eps)) / (2 * fd_step)
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        if abs(det) < 1e-14:
            raise SingularJacobian(f"|det J| = {abs(det):.3g} at T={x[0]}, Omega={x[1]}")
        x = x - np.linalg.solve(J, F)
        F = _residual(x, alpha, eps)
    raise NoConvergence(
        f"Newton did not converge in {max_iter} iterations (residual {np.max(np.abs(F)):.3g})"
    )
