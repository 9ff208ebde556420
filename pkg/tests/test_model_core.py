import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from delayvdp.errors import ModeNonexistent, NotAHopf, OutOfDomain
from delayvdp.model_core import (
    ALPHA_INTERSECTION,
    Params,
    hopf_curve_ode,
    in_phase_mode,
    lindstedt_residual,
    mode_birth_curve,
    ode_slow_flow_matrix,
    saddle_node_curve,
)


def test_params_validation():
    with pytest.raises(ValueError):
        Params(1.0, 1.0, -0.1)
    with pytest.raises(ValueError):
        Params(1.0, -1.0, 0.1)
    with pytest.raises(ValueError):
        Params(1.0, 1.0, 0.1, beta=0)


def test_in_phase_mode_uncoupled():
    m = in_phase_mode(Params(0.0, 1.0, 0.1))
    assert (m.R, m.omega, m.k) == (2.0, 1.0, 0.0)


def test_in_phase_mode_quarter_delay():
    m = in_phase_mode(Params(1.0, math.pi / 2, 0.5))
    assert m.R == pytest.approx(2.0, abs=1e-15)
    assert m.k == pytest.approx(-0.5, abs=1e-15)
    assert m.omega == pytest.approx(0.75, abs=1e-15)


def test_in_phase_mode_nonexistent():
    with pytest.raises(ModeNonexistent):
        in_phase_mode(Params(1.0, math.pi, 0.1))


def test_mode_amplitude_vanishes_at_birth():
    a = 1.5
    Tb = mode_birth_curve(a)
    amps = [in_phase_mode(Params(a, Tb - d)).R for d in (1e-2, 1e-4, 1e-6)]
    assert amps[0] > amps[1] > amps[2]
    assert amps[2] < 1e-2
    with pytest.raises(ModeNonexistent):
        in_phase_mode(Params(a, Tb + 1e-9))


@given(st.floats(-3, 3), st.floats(0, 10), st.floats(0, 1))
def test_in_phase_mode_invariants(a, T, eps):
    try:
        m = in_phase_mode(Params(a, T, eps))
    except ModeNonexistent:
        assert 1 + a * math.cos(T) <= 0
        return
    assert m.R**2 <= 4 * (1 + abs(a)) + 1e-12
    assert m.omega == pytest.approx(1 - eps * a / 2 * math.sin(T), abs=1e-14)


def test_slow_flow_matrix_examples():
    M = ode_slow_flow_matrix(Params(0.0, 1.3)).as_array()
    np.testing.assert_array_equal(M, [[-1, 0], [0, 0]])
    M = ode_slow_flow_matrix(Params(1.0, math.pi / 3, beta=1)).as_array()
    np.testing.assert_allclose(M, [[-1.5, 0], [0, 0]], atol=1e-15)
    m = ode_slow_flow_matrix(Params(ALPHA_INTERSECTION, 3 * math.pi / 4))
    assert abs(m.trace) < 1e-15


@given(st.floats(-2, 2), st.floats(0, 2 * math.pi))
def test_slow_flow_matrix_trace_det(a, T):
    m = ode_slow_flow_matrix(Params(a, T))
    c, s = math.cos(T), math.sin(T)
    assert m.m11 == pytest.approx(-1 - 2 * a * c, abs=1e-14)
    assert m.m12 == pytest.approx(a * s, abs=1e-14)
    assert m.m21 == pytest.approx(-a * s, abs=1e-14)
    assert m.m22 == pytest.approx(-a * c, abs=1e-14)
    assert m.trace == pytest.approx(-1 - 3 * a * c, abs=1e-13)
    assert m.det == pytest.approx(a * a + a * c + a * a * c * c, abs=1e-13)


def test_hopf_curve_examples():
    assert hopf_curve_ode(1 / 3, require_hopf=False) == pytest.approx(math.pi, abs=1e-15)
    with pytest.raises(NotAHopf):
        hopf_curve_ode(1 / 3)
    assert hopf_curve_ode(ALPHA_INTERSECTION) == pytest.approx(3 * math.pi / 4, abs=1e-12)
    assert hopf_curve_ode(1.0) == pytest.approx(1.9106332362490186, abs=1e-12)
    with pytest.raises(OutOfDomain):
        hopf_curve_ode(0.3)


def test_curve_branches():
    th = hopf_curve_ode(1.0)
    assert hopf_curve_ode(1.0, branch=1) == pytest.approx(2 * math.pi - th)
    assert hopf_curve_ode(1.0, branch=2) == pytest.approx(2 * math.pi + th)


@settings(max_examples=200)
@given(st.floats(ALPHA_INTERSECTION + 1e-9, 5.0))
def test_hopf_curve_is_zero_trace_positive_det(a):
    m = ode_slow_flow_matrix(Params(a, hopf_curve_ode(a)))
    assert abs(m.trace) < 1e-12
    assert m.det > 0


def test_saddle_node_examples():
    assert saddle_node_curve(0.5) == pytest.approx(math.pi, abs=1e-12)
    assert saddle_node_curve(ALPHA_INTERSECTION) == pytest.approx(3 * math.pi / 4, abs=1e-12)
    assert saddle_node_curve(0.4) == pytest.approx(2 * math.pi / 3, abs=1e-12)
    for bad in (0.0, -0.1, 0.51):
        with pytest.raises(OutOfDomain):
            saddle_node_curve(bad)


@settings(max_examples=200)
@given(st.floats(1e-6, 0.5))
def test_saddle_node_is_zero_det(a):
    T = saddle_node_curve(a)
    assert math.pi / 2 < T <= math.pi
    c = math.cos(T)
    assert a == pytest.approx(-c / (1 + c * c), abs=1e-12)
    assert abs(ode_slow_flow_matrix(Params(a, T)).det) < 1e-12


def test_mode_birth_examples():
    assert mode_birth_curve(1.0) == pytest.approx(math.pi)
    assert mode_birth_curve(2.0) == pytest.approx(2 * math.pi / 3)
    assert mode_birth_curve(math.sqrt(2)) == pytest.approx(3 * math.pi / 4)
    with pytest.raises(OutOfDomain):
        mode_birth_curve(0.99)


def _residual_norm(a, T, eps, order):
    p = Params(a, T, eps)
    w = in_phase_mode(p).omega
    t = np.linspace(0, 2 * np.pi / w, 4001)
    return np.abs(lindstedt_residual(p, t, order)).max()


def test_lindstedt_residual_first_order_correction_is_second_order():
    r = [_residual_norm(0.5, 1.0, e, order=1) for e in (0.1, 0.05)]
    assert 3.0 <= r[0] / r[1] <= 5.0


def test_lindstedt_residual_bare_mode_is_first_order():
    # the unremoved sin(3 omega t) forcing keeps the bare-mode residual O(eps)
    r = [_residual_norm(0.5, 1.0, e, order=0) for e in (0.1, 0.05)]
    assert 1.8 <= r[0] / r[1] <= 2.2


def test_lindstedt_residual_resonant_part_is_second_order():
    def resonant(eps):
        p = Params(0.5, 1.0, eps)
        w = in_phase_mode(p).omega
        t = np.linspace(0, 2 * np.pi / w, 4096, endpoint=False)
        r = lindstedt_residual(p, t, 0)
        return math.hypot(np.mean(r * np.cos(w * t)), np.mean(r * np.sin(w * t)))
    ratio = resonant(0.1) / resonant(0.05)
    assert 3.0 <= ratio <= 5.0
