"""
Simulating the delayed slow flow and the full oscillator pair.

The critical delay found by bisection on simulated growth rates is
compared with the Newton root, then the prediction is checked on the
original coupled oscillators.
"""

import numpy as np

from delayvdp import Params, critical_delay, full_system_rhs, hopf_newton, hopf_series, integrate
from delayvdp.stability_scan import probe_growth

alpha, eps = 1.0, 0.3
root = hopf_newton(alpha, eps, hopf_series(alpha, eps, 3))

## Growth rate of the slow flow on either side of the Hopf delay
for dT in (-0.1, -0.01, 0.01, 0.1):
    g = probe_growth(Params(alpha, root.T + dT, eps))
    print(f"T = T_hopf {dT:+.2f}: rate {g.rate:+.5f} ({g.method} fit)")

## Bisection for the sign change
T_sim = critical_delay(alpha, eps, root.T - 0.3, root.T + 0.3, tol=1e-4)
print(f"\nsimulated T = {T_sim:.5f}, Newton T = {root.T:.5f}")

## The full system: anti-symmetric deviation below and above the Hopf delay
eps_full = 0.1
T3 = hopf_series(alpha, eps_full, 3).T
for T in (T3 - 0.2, T3 + 0.2):
    tr = integrate(full_system_rhs(Params(alpha, T, eps_full), (0.05, 0.0)), 400.0, 0.01)
    d = np.abs(tr.y[:, 0] - tr.y[:, 2])
    print(f"T={T:.3f}: max|x1-x2| early {d[tr.t < 60].max():.2e}, late {d[tr.t > 360].max():.2e}")
