"""
Hopf points of the delayed slow flow: perturbation series against Newton.

With the delay kept in the slow flow, the characteristic function is
transcendental. Its Hopf points are approximated by a series in eps and
refined by Newton's method on (T, Omega).
"""

from delayvdp import Params, char_eq, hopf_newton, hopf_series, series_coeffs

## Coefficients of the series at alpha = 1
sc = series_coeffs(1.0)
print("T0, T1, T2       =", sc.T0, sc.T1, sc.T2)
print("Om0, Om1, Om2    =", sc.Omega0, sc.Omega1, sc.Omega2)

## Truncations compared with the refined root
for eps in (0.1, 0.3, 0.5):
    root = hopf_newton(1.0, eps, hopf_series(1.0, eps, 3))
    line = [f"eps={eps}:"]
    for n in (1, 2, 3):
        T = hopf_series(1.0, eps, n).T
        line.append(f"n={n} T={T:.5f} (err {abs(T - root.T):.1e})")
    line.append(f"newton T={root.T:.5f}")
    print("  ".join(line))

## The series residual shrinks like eps^3
for eps in (0.2, 0.1, 0.05):
    hp = hopf_series(0.8, eps, 3)
    print(f"eps={eps:5.3f}  |D(i Omega)| = {abs(char_eq(1j * hp.Omega, Params(0.8, hp.T, eps))):.3e}")
