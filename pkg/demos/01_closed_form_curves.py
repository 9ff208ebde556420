"""
Closed-form picture of the in-phase mode and its ODE slow flow.

Run with ``python demos/01_closed_form_curves.py``.
"""

import math

import numpy as np

from delayvdp import (
    Params,
    hopf_curve_ode,
    in_phase_mode,
    mode_birth_curve,
    ode_slow_flow_matrix,
    saddle_node_curve,
)
from delayvdp.model_core import ALPHA_INTERSECTION

## The in-phase mode: amplitude and frequency from Lindstedt's method
for alpha, T in [(0.0, 1.0), (1.0, math.pi / 2), (0.8, 2.0)]:
    mode = in_phase_mode(Params(alpha, T, eps=0.5))
    print(f"alpha={alpha:.2f} T={T:.3f}:  R={mode.R:.4f}  omega={mode.omega:.4f}")

## Slow-flow matrix for the anti-symmetric channel (beta = -1)
M = ode_slow_flow_matrix(Params(1.0, 2.0))
print("\nM =", M.as_array().round(4).tolist(), " trace", round(M.trace, 4), " det", round(M.det, 4))

## The three bifurcation curves on the principal branch
print("\n alpha    T_hopf   T_saddle  T_birth")
for a in np.linspace(0.3, 1.5, 7):
    cells = []
    for fn in (hopf_curve_ode, saddle_node_curve, mode_birth_curve):
        try:
            cells.append(f"{fn(a):8.4f}")
        except Exception:
            cells.append("       -")
    print(f"{a:6.3f}  " + "  ".join(cells))

## The Hopf and saddle-node curves meet at (sqrt(2)/3, 3 pi / 4)
print("\nintersection:", hopf_curve_ode(ALPHA_INTERSECTION), saddle_node_curve(ALPHA_INTERSECTION),
      3 * math.pi / 4)
