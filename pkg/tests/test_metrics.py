import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tatsqueeze import continuous as ct, metrics as me, multipass as mp
from tatsqueeze.errors import ModelViolationError, ParameterError
from tatsqueeze.params import PhysicalParams


def test_coherent_state_is_unity():
    r = me.xi_squared(0.5 * np.eye(2))
    assert r.xi2 == 1.0 and r.xi2_db == 0.0 and r.theta_opt == 0.0


def test_ideal_tat_angle_and_value():
    kappa = 2.082
    m = ct.assemble(PhysicalParams(eta_tilde=0.0, kappa2=kappa ** 2), ct.ideal_controls(kappa ** 2))
    r = me.xi_squared(ct.propagate_covariance(m).cov)
    assert r.xi2 == pytest.approx(math.exp(-math.sqrt(3) * kappa ** 2 / 2), rel=1e-9)
    assert r.theta_opt == pytest.approx(math.pi / 4, abs=1e-9)


def test_squeezed_along_y_and_z():
    assert me.xi_squared(np.diag([0.1, 2.5])).theta_opt == pytest.approx(math.pi / 2)
    assert me.xi_squared(np.diag([2.5, 0.1])).theta_opt == 0.0


def test_decay_only_penalty():
    r = me.xi_squared_decayed(0.5 * np.eye(2), 0.26)
    assert r.xi2 == pytest.approx(1 / 0.74 ** 2)
    assert r.mean_jx_out == 0.74


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.05, 3.0), st.floats(-1.0, 1.0), st.floats(0, 2 * math.pi))
def test_rotation_invariance(a, b, c, angle):
    cov = np.array([[a, c * math.sqrt(a * b) * 0.99], [c * math.sqrt(a * b) * 0.99, b]])
    r = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    x = me.xi_squared(cov).xi2
    assert me.xi_squared(r @ cov @ r.T).xi2 == pytest.approx(x, rel=1e-9)


def test_variance_along_reported_angle_is_minimal():
    cov = np.array([[0.9, 0.6], [0.6, 0.7]])
    r = me.xi_squared(cov)
    t = r.theta_opt
    # J_theta = J_z cos - J_y sin, i.e. direction (-sin, cos) in (X, P)
    u = np.array([-math.sin(t), math.cos(t)])
    assert 2 * u @ cov @ u == pytest.approx(r.xi2, rel=1e-12)


def test_guards():
    with pytest.raises(ModelViolationError):
        me.xi_squared(np.diag([-0.1, 1.0]))
    with pytest.raises(ModelViolationError):
        me.xi_squared(np.diag([1e-12, 1e3]))
    with pytest.raises(ParameterError):
        me.xi_squared(np.eye(3))
    with pytest.raises(ParameterError):
        me.xi_squared(np.eye(2), mean_jx_out=0.0)


def test_db_conversion():
    assert me.to_db(0.1) == pytest.approx(10.0)
    assert me.to_db(1.0) == 0.0


def test_dp_reference_values():
    assert me.dp_reference(0.0) == 1.0
    assert me.dp_reference(10.0) == pytest.approx(0.019702, abs=1e-6)
    with pytest.raises(ParameterError):
        me.dp_reference(-1.0)


@pytest.mark.parametrize("kappa", [0.1, 0.3, 1.0, 3.0, 10.0])
def test_dp_reference_matches_textbook_form(kappa):
    k2 = kappa * kappa
    direct = 1 + (k2 * k2 / 2 + k2) * (1 - math.sqrt(1 + 4 / (2 + k2) ** 2))
    # the direct form cancels catastrophically as kappa grows
    assert me.dp_reference(kappa) == pytest.approx(direct, rel=1e-15 * max(1.0, k2 * k2) / me.dp_reference(kappa) + 1e-13)


@pytest.mark.parametrize("kappa", [10.0, 30.0, 100.0])
def test_dp_reference_asymptote(kappa):
    assert abs(me.dp_reference(kappa) * kappa ** 2 / 2 - 1) < 5 / kappa ** 2


def test_ideal_oat_reference():
    assert me.ideal_oat_reference(0.0) == 1.0
    assert me.ideal_oat_reference(1.0) == pytest.approx(0.4313, abs=5e-5)


@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0])
def test_ideal_oat_matches_single_segment_triple_pass(kappa):
    out = mp.simulate(PhysicalParams(eta_tilde=0.0, kappa2=kappa ** 2), mp.triple_pass(), 1)
    assert me.xi_squared(out.spin_cov).xi2 == pytest.approx(me.ideal_oat_reference(kappa), rel=1e-9)


def test_ideal_tat_reference():
    assert me.ideal_tat_reference(math.sqrt(2.0)) == pytest.approx(math.exp(-math.sqrt(3)), rel=1e-14)


def test_ideal_tat_reference_for_ring_matches_discrete():
    n, kappa2 = 7, 0.5
    cfg = mp.ring(n, mp.tat_larmor_rate(n, kappa2))
    cov = mp.spin_covariance(PhysicalParams(eta_tilde=0.0, kappa2=kappa2), cfg, 2000)
    assert me.xi_squared(cov).xi2 == pytest.approx(me.ideal_tat_reference(math.sqrt(kappa2), n), rel=2e-3)


@pytest.mark.parametrize("kappa", np.linspace(0.3, 3.0, 10))
def test_reference_ordering(kappa):
    assert me.ideal_tat_reference(kappa) < me.ideal_oat_reference(kappa) < me.dp_reference(kappa) < 1
