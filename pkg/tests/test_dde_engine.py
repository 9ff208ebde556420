import math

import numpy as np
import pytest
from scipy.linalg import expm

from delayvdp.dde_engine import (
    DdeProblem,
    Trajectory,
    effective_step,
    full_system_rhs,
    integrate,
    slow_flow_rhs,
)
from delayvdp.errors import ModeNonexistent, NonFiniteState
from delayvdp.model_core import ALPHA_INTERSECTION, T_INTERSECTION, Params, ode_slow_flow_matrix
from delayvdp.spectral import hopf_series
from delayvdp.stability_scan import growth_rate


def rk4_reference(M, y0, h, n):
    """Independent RK4 on y' = M y."""
    y = np.array(y0, dtype=float)
    out = [y.copy()]
    for _ in range(n):
        k1 = M @ y
        k2 = M @ (y + h / 2 * k1)
        k3 = M @ (y + h / 2 * k2)
        k4 = M @ (y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(y.copy())
    return np.array(out)


def test_effective_step():
    assert effective_step(1.0, 0.01) == (pytest.approx(0.01), 100)
    h, m = effective_step(0.02, 0.01)
    assert m == 4 and h == pytest.approx(0.005)
    h, m = effective_step(0.853, 0.01)
    assert m == 86 and h * m == pytest.approx(0.853)
    assert effective_step(0.0, 0.01) == (0.01, 0)


def test_scalar_delay_problem_exact():
    # x' = -x(t-1), x = 1 for t <= 0: x = 1 - t on [0,1], x(2) = -1/2
    prob = DdeProblem(1, 1.0, lambda t, y, yd: -yd, lambda t: np.array([1.0]))
    tr = integrate(prob, 2.0, 0.01)
    assert abs(tr.eval(1.0)[0]) < 1e-12
    assert tr.eval(2.0)[0] == pytest.approx(-0.5, abs=1e-6)
    # on [1, 2]: x = 3/2 - 2t + t^2/2, so x(3) = -1/2 - int_1^2 x(u) du = -1/2 + 1/3
    tr = integrate(prob, 3.0, 0.01)
    assert tr.eval(3.0)[0] == pytest.approx(-1.0 / 6.0, abs=1e-9)


def test_zero_lag_slow_flow_matches_reference_rk4():
    p = Params(0.8, 1.9, 0.0)
    tr = integrate(slow_flow_rhs(p, initial=(1.0, 0.0)), 10.0, 0.01)
    M = ode_slow_flow_matrix(p).as_array()
    ref = rk4_reference(M, (1.0, 0.0), tr.h, tr.n_nodes - 1)
    assert np.max(np.abs(tr.y - ref)) < 1e-10
    exact = np.array([expm(M * t) @ [1.0, 0.0] for t in tr.t[::100]])
    assert np.max(np.abs(tr.y[::100] - exact)) < 1e-8


def test_rk4_fourth_order():
    p = Params(1.0, 1.7, 0.0)
    M = ode_slow_flow_matrix(p).as_array()
    errs = []
    for h in (0.2, 0.1):
        tr = integrate(slow_flow_rhs(p), 10.0, h)
        exact = np.array([expm(M * t) @ [1.0, 0.0] for t in tr.t])
        errs.append(np.max(np.abs(tr.y - exact)))
    assert 16 * 0.7 <= errs[0] / errs[1] <= 16 * 1.3


def test_slow_flow_rhs_examples():
    rng = np.random.default_rng(1)
    prob = slow_flow_rhs(Params(0.0, 2.0, 0.3))
    for _ in range(10):
        y, yd = rng.normal(size=2), rng.normal(size=2)
        np.testing.assert_allclose(prob.rhs(0.0, y, yd), [-y[0], 0.0], atol=1e-15)
    p = Params(0.9, 2.1, 0.4)
    prob = slow_flow_rhs(p)
    assert prob.delay == pytest.approx(0.4 * 2.1)
    M = ode_slow_flow_matrix(p).as_array()
    for _ in range(100):
        y = rng.normal(size=2)
        np.testing.assert_allclose(prob.rhs(0.0, y, y), M @ y, atol=1e-13)
    prob = slow_flow_rhs(Params(0.9, 2.1, 0.4, beta=1))
    for _ in range(20):
        y = rng.normal(size=2)
        assert abs(prob.rhs(0.0, y, y)[1]) < 1e-14


def test_slow_flow_rhs_coefficients():
    # delayed slow flow written out term by term
    a, T, b = 0.7, 2.2, -1
    c, s = math.cos(T), math.sin(T)
    prob = slow_flow_rhs(Params(a, T, 0.2, b))
    A, B, Ad, Bd = 0.3, -1.1, 0.9, 0.4
    dA = -A - 1.5 * a * A * c + 0.5 * a * B * s + 0.5 * a * Ad * b * c - 0.5 * a * b * Bd * s
    dB = -0.5 * a * A * s - 0.5 * a * B * c + 0.5 * a * Ad * b * s + 0.5 * a * b * Bd * c
    np.testing.assert_allclose(prob.rhs(0, np.array([A, B]), np.array([Ad, Bd])), [dA, dB])


def test_nilpotent_trace_zero_point_grows_linearly():
    # at (sqrt(2)/3, 3pi/4) trace and determinant both vanish: M @ M = 0
    p = Params(ALPHA_INTERSECTION, T_INTERSECTION, 0.0)
    M = ode_slow_flow_matrix(p).as_array()
    np.testing.assert_allclose(M @ M, 0, atol=1e-15)
    tr = integrate(slow_flow_rhs(p), 60.0, 0.01)
    exact = np.array([1.0, 0.0]) + tr.t[:, None] * (M @ [1.0, 0.0])
    np.testing.assert_allclose(tr.y, exact, atol=1e-10)
    # no exponential growth: the fitted rate tends to zero with the window
    long = integrate(slow_flow_rhs(p), 4000.0, 0.1)
    assert abs(growth_rate(long).rate) < 1e-3


def test_hopf_point_has_neutral_growth():
    p = Params(1.0, math.acos(-1 / 3), 0.0)
    g = growth_rate(integrate(slow_flow_rhs(p), 60.0, 0.01))
    assert abs(g.rate) < 1e-3


def test_hermite_reproduces_nodes():
    tr = integrate(slow_flow_rhs(Params(1.0, 1.7, 0.5)), 5.0, 0.01)
    np.testing.assert_array_equal(tr.eval(tr.t), tr.y)
    with pytest.raises(ValueError):
        tr.eval(tr.t_end + 1.0)


def test_hermite_is_c1():
    tr = integrate(slow_flow_rhs(Params(1.0, 1.7, 0.5)), 5.0, 0.01)
    t = tr.t[123]
    d = 1e-7
    left = (tr.eval(t) - tr.eval(t - d)) / d
    right = (tr.eval(t + d) - tr.eval(t)) / d
    np.testing.assert_allclose(left, tr.f[123], atol=1e-5)
    np.testing.assert_allclose(right, tr.f[123], atol=1e-5)


@pytest.mark.parametrize("c", [-1.0, 2.0, 0.5])
def test_slow_flow_linearity(c):
    p = Params(0.9, 1.95, 0.3)
    base = integrate(slow_flow_rhs(p, initial=(0.7, -0.2)), 20.0, 0.01)
    scaled = integrate(slow_flow_rhs(p, initial=(0.7 * c, -0.2 * c)), 20.0, 0.01)
    np.testing.assert_allclose(scaled.y, c * base.y, atol=1e-10)


def test_trajectory_is_immutable_and_exports_csv(tmp_path):
    tr = integrate(slow_flow_rhs(Params(1.0, 1.7, 0.5)), 1.0, 0.1)
    with pytest.raises(ValueError):
        tr.y[0, 0] = 3.0
    text = tr.to_csv(tmp_path / "traj.csv")
    lines = text.splitlines()
    assert lines[0] == "t,A,B"
    assert len(lines) == tr.n_nodes + 1
    assert (tmp_path / "traj.csv").read_text() == text
    assert lines[2].split(",")[1] == f"{tr.y[1, 0]:.15g}"


def test_blowup_reports_partial_trajectory():
    prob = DdeProblem(1, 0.5, lambda t, y, yd: 50.0 * y * y, lambda t: np.array([1.0]))
    with pytest.raises(NonFiniteState) as ei, np.errstate(over="ignore", invalid="ignore"):
        integrate(prob, 10.0, 0.01)
    assert ei.value.t_blowup < 10.0
    assert isinstance(ei.value.trajectory, Trajectory)


def _diff_amplitude(tr, t_from, t_to):
    sel = (tr.t >= t_from) & (tr.t <= t_to)
    d = tr.y[sel, 0] - tr.y[sel, 2]
    return np.abs(d).max()


def test_full_system_symmetry():
    tr = integrate(full_system_rhs(Params(1.0, 1.8, 0.1), (0.0, 0.0)), 100.0, 0.01)
    np.testing.assert_array_equal(tr.y[:, 0], tr.y[:, 2])
    np.testing.assert_array_equal(tr.y[:, 1], tr.y[:, 3])


def test_full_system_uncoupled_limit_cycle():
    tr = integrate(full_system_rhs(Params(0.0, 1.0, 0.1), (0.0, 0.0)), 200.0, 0.01)
    late = tr.t > 180
    assert np.abs(tr.y[late, 0]).max() == pytest.approx(2.0, abs=0.05)
    assert np.abs(tr.y[late, 2]).max() == pytest.approx(2.0, abs=0.05)


def test_full_system_mode_must_exist():
    with pytest.raises(ModeNonexistent):
        full_system_rhs(Params(1.0, math.pi, 0.1))


@pytest.mark.parametrize("shift,grows", [(-0.2, False), (0.2, True)])
def test_full_system_antisymmetric_stability(shift, grows):
    T = hopf_series(1.0, 0.1, 3).T + shift
    tr = integrate(full_system_rhs(Params(1.0, T, 0.1), (0.05, 0.0)), 400.0, 0.01)
    early = _diff_amplitude(tr, 20, 60)
    late = _diff_amplitude(tr, 360, 400)
    assert (late > early) == grows


@pytest.mark.parametrize("p", [Params(1.0, 1.7, 0.5), Params(0.8, 2.0, 0.01),
                               Params(1.0, 1.9, 0.0), Params(0.9, 2.2, 0.3, beta=1)])
def test_linear_fast_path_matches_stepwise(p):
    import dataclasses
    prob = slow_flow_rhs(p, initial=(0.3, -0.7))
    fast = integrate(prob, 30.0, 0.01)
    slow = integrate(dataclasses.replace(prob, linear=None), 30.0, 0.01)
    scale = np.abs(slow.y).max()
    np.testing.assert_allclose(fast.y, slow.y, rtol=0, atol=1e-11 * scale)
    np.testing.assert_allclose(fast.f, slow.f, rtol=0, atol=1e-11 * max(1.0, np.abs(slow.f).max()))


def test_linear_fast_path_blowup():
    p = Params(1.0, 2.8, 0.1)
    with pytest.raises(NonFiniteState) as ei:
        integrate(slow_flow_rhs(p), 5000.0, 0.05)
    tr = ei.value.trajectory
    assert np.isfinite(tr.y).all()
    assert ei.value.t_blowup == pytest.approx(tr.t_end + tr.h)
