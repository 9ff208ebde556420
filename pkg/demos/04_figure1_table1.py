"""
Critical delay versus coupling at eps = 0.5, and the truncation-error table.

Takes a few minutes: every grid point runs a bisection of slow-flow
simulations. If matplotlib is installed, the curves are also plotted to
``fig1.png``.
"""

from delayvdp import ScanConfig, default_alpha_grid, error_table, sweep

## Curves: series with 1, 2, 3 terms and the simulated transition
results = sweep(default_alpha_grid(12), 0.5)
print(" alpha    n=1      n=2      n=3      sim")
for r in results:
    print(f"{r.alpha:6.3f} " + " ".join(f"{v:8.4f}" for v in (*r.T_series, r.T_sim)))

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    a = [r.alpha for r in results]
    plt.plot(a, [r.T_series[0] for r in results], "k--", label="n=1 (eps=0)")
    plt.plot(a, [r.T_series[1] for r in results], "k-.", label="n=2")
    plt.plot(a, [r.T_series[2] for r in results], "k-", label="n=3")
    plt.plot(a, [r.T_sim for r in results], "k+", ms=10, label="simulation")
    plt.xlabel("alpha")
    plt.ylabel("T_hopf")
    plt.legend()
    plt.savefig("fig1.png", dpi=120)

## Table of maximum errors over the alpha grid
table = error_table(grid_size=20, cfg=ScanConfig(tol=1e-4))
print()
print(table.to_text())
