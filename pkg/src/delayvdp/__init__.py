"""Stability of the in-phase mode of two delay-coupled van der Pol oscillators.

Submodules
----------
model_core
    In-phase mode, ODE slow-flow matrix, closed-form bifurcation curves.
spectral
    Characteristic function of the delayed slow flow, eps-series and Newton Hopf points.
dde_engine
    RK4 method-of-steps integrator and the slow-flow / full-system right-hand sides.
stability_scan
    Growth-rate fits, bisection for the critical delay, alpha sweeps and error tables.
cli
    ``delayvdp`` command-line interface.
"""

from .errors import *  # noqa: F401,F403
from .model_core import (
    Params,
    InPhaseMode,
    SlowFlowMatrix,
    in_phase_mode,
    ode_slow_flow_matrix,
    hopf_curve_ode,
    saddle_node_curve,
    mode_birth_curve,
    lindstedt_residual,
)
from .spectral import SeriesCoeffs, HopfPoint, char_eq, series_coeffs, hopf_series, hopf_newton
from .dde_engine import DdeProblem, Trajectory, integrate, slow_flow_rhs, full_system_rhs
from .stability_scan import (
    GrowthEstimate,
    ScanConfig,
    ScanResult,
    growth_rate,
    critical_delay,
    sweep,
    error_table,
    default_alpha_grid,
)

__version__ = "0.1.0"
