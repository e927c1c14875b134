import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tatsqueeze import gaussian as g
from tatsqueeze.errors import ModelViolationError, ParameterError

angles = st.floats(-2 * math.pi, 2 * math.pi)
couplings = st.floats(0.0, 3.0)


def two_mode():
    return g.add_vacuum_mode(g.vacuum(), "light")


def test_vacuum_state():
    s = g.vacuum(("spin", "a"))
    assert np.array_equal(s.cov, 0.5 * np.eye(4))
    assert np.array_equal(s.mean, np.zeros(4))
    assert np.allclose(g.symplectic_eigenvalues(s), 0.5)


def test_state_is_immutable():
    s = g.vacuum()
    with pytest.raises(ValueError):
        s.cov[0, 0] = 1.0


def test_faraday_forward_pass_moments():
    k = 1.3
    s = g.faraday_pass(two_mode(), "spin", "light", k, 0.0)
    xl, pl, X, P = s.index("light"), s.index("light") + 1, 0, 1
    assert s.cov[xl, xl] == pytest.approx((1 + k * k) / 2)
    assert s.cov[xl, P] == pytest.approx(k / 2)
    assert s.cov[X, X] == pytest.approx((1 + k * k) / 2)
    assert s.cov[P, P] == pytest.approx(0.5)


def test_faraday_zero_coupling_is_identity():
    s = two_mode()
    assert np.array_equal(g.faraday_pass(s, "spin", "light", 0.0, 0.7).cov, s.cov)


def test_faraday_reversed_pass_flips_signs():
    k = 0.8
    t = g.faraday_transfer(2, 0, 2, k, math.pi)
    mean = np.array([0.3, -0.2, 0.1, 0.4])
    out = t @ mean
    assert out[2] == pytest.approx(0.1 - k * -0.2)   # x_L -= k P_A
    assert out[0] == pytest.approx(0.3 - k * 0.4)    # X_A -= k p_L
    assert out[1] == pytest.approx(-0.2, abs=1e-15)  # P_A unchanged
    assert out[3] == 0.4


def test_faraday_rejects_negative_coupling_and_unknown_modes():
    with pytest.raises(ParameterError):
        g.faraday_pass(two_mode(), "spin", "light", -1.0, 0.0)
    with pytest.raises(KeyError):
        g.faraday_pass(two_mode(), "spin", "nope", 1.0, 0.0)


def test_rotation_examples():
    s = g.faraday_pass(two_mode(), "spin", "light", 0.9, 0.3)
    assert np.allclose(g.quadrature_rotation(s, "light", 0.0).cov, s.cov)
    twice = g.quadrature_rotation(g.quadrature_rotation(s, "light", math.pi / 3), "light", math.pi / 3)
    once = g.quadrature_rotation(s, "light", 2 * math.pi / 3)
    assert np.allclose(twice.cov, once.cov, atol=1e-14)
    q = g.quadrature_rotation(s, "light", math.pi / 2)
    i = s.index("light")
    assert q.cov[i, i] == pytest.approx(s.cov[i + 1, i + 1])
    assert q.cov[i + 1, i + 1] == pytest.approx(s.cov[i, i])
    assert q.cov[i, 1] == pytest.approx(s.cov[i + 1, 1])       # x -> p
    assert q.cov[i + 1, 1] == pytest.approx(-s.cov[i, 1])      # p -> -x


def test_loss_channel_examples():
    s = g.faraday_pass(two_mode(), "spin", "light", 1.0, 0.0)
    assert np.allclose(g.loss_channel(s, "light", 0.0).cov, s.cov)
    full = g.loss_channel(s, "light", 1.0)
    i = s.index("light")
    assert np.allclose(full.block("light"), 0.5 * np.eye(2))
    assert np.allclose(full.cov[i:i + 2, :2], 0.0)
    cov = 0.5 * np.eye(2)
    cov[0, 0] = 1.5
    lone = g.GaussianState(np.zeros(2), cov, ("light",))
    assert g.loss_channel(lone, "light", 0.02).cov[0, 0] == pytest.approx(1.48)
    with pytest.raises(ParameterError):
        g.loss_channel(lone, "light", 1.5)


def test_decay_examples():
    s = g.GaussianState(np.array([1.0, 2.0]), np.diag([0.2, 3.0]), ("spin",))
    assert np.array_equal(g.spin_decay_step(s, 0.0, 0.1).cov, s.cov)
    css = g.vacuum()
    assert np.allclose(g.spin_decay_step(css, 0.7, 0.5).cov, css.cov)
    out = g.spin_decay_step(s, 1.0, 0.1)
    assert out.cov[0, 0] == pytest.approx(0.23)
    assert out.mean[0] == pytest.approx(0.95)


def test_decay_scales_correlations_like_a_damping_channel():
    s = g.faraday_pass(two_mode(), "spin", "light", 1.5, 0.0)
    out = g.spin_decay_step(s, 0.5, 1.0)
    assert np.allclose(out.cov[2:, :2], math.sqrt(0.5) * s.cov[2:, :2])
    g.check_physical(out)
    with pytest.raises(ParameterError):
        g.spin_decay_step(s, 0.9, 0.6)


def test_partial_trace_examples():
    s = g.add_vacuum_mode(g.vacuum(), "a")
    assert np.array_equal(g.partial_trace(s, "a").cov, g.vacuum().cov)
    k = 0.7
    t = g.partial_trace(g.faraday_pass(s, "spin", "a", k, 0.0), "a")
    assert t.cov[0, 0] == pytest.approx((1 + k * k) / 2)
    three = g.faraday_pass(g.faraday_pass(g.add_vacuum_mode(s, "b"), "spin", "a", 0.4, 0.1),
                           "spin", "b", 0.9, 1.2)
    ab = g.partial_trace(g.partial_trace(three, "a"), "b")
    ba = g.partial_trace(g.partial_trace(three, "b"), "a")
    assert np.array_equal(ab.cov, ba.cov)
    with pytest.raises(ValueError):
        g.partial_trace(s, "spin")
    with pytest.raises(ValueError):
        g.partial_trace(g.vacuum(("a",)), "a")


def test_symplectic_eigenvalue_checks():
    with pytest.raises(ModelViolationError):
        g.symplectic_eigenvalues(np.diag([1.0, -0.1]))
    with pytest.raises(ModelViolationError):
        g.check_physical(np.diag([0.1, 0.1]))
    g.check_physical(g.vacuum(("spin", "a", "b")))


def _random_pass_sequence(draw_ops, s):
    for kind, a, b in draw_ops:
        if kind == 0:
            s = g.faraday_pass(s, "spin", "light", a, b % (2 * math.pi))
        elif kind == 1:
            s = g.quadrature_rotation(s, "light", a + b)
        else:
            s = g.quadrature_rotation(s, "spin", b)
    return s


ops = st.lists(st.tuples(st.integers(0, 2), couplings, angles), min_size=1, max_size=8)


@given(ops)
def test_lossless_ops_preserve_symplectic_spectrum_and_det(seq):
    s = _random_pass_sequence(seq, two_mode())
    nu = g.symplectic_eigenvalues(s)
    assert np.allclose(nu, 0.5, atol=1e-9 * max(1.0, np.abs(s.cov).max()))
    assert np.linalg.det(s.cov) == pytest.approx(1 / 16, rel=1e-6)
    assert np.array_equal(s.cov, s.cov.T)


@given(ops, st.floats(0, 1), st.floats(0, 0.5), st.floats(0, 1))
def test_noisy_ops_keep_state_physical(seq, zeta, rate, dt):
    s = _random_pass_sequence(seq, two_mode())
    s = g.loss_channel(s, "light", zeta)
    s = g.spin_decay_step(s, rate, dt)
    g.check_physical(s)


# near zeta = 1 the sqrt(1 - zeta) amplitudes only carry ~1e-8 absolute accuracy
@given(st.floats(0, 0.999), st.floats(0, 0.999), couplings)
def test_loss_channels_compose(z1, z2, k):
    s = g.faraday_pass(two_mode(), "spin", "light", k, 0.4)
    s = g.GaussianState(np.array([0.2, -0.1, 0.5, 0.3]), np.array(s.cov), s.mode_labels)
    a = g.loss_channel(g.loss_channel(s, "light", z1), "light", z2)
    b = g.loss_channel(s, "light", 1 - (1 - z1) * (1 - z2))
    assert np.allclose(a.mean, b.mean, atol=1e-12)
    assert np.allclose(a.cov, b.cov, atol=1e-12)


@settings(max_examples=50)
@given(couplings, angles, angles)
def test_ops_match_explicit_matrices(k, theta, rot):
    s = g.GaussianState(np.array([0.1, 0.2, -0.3, 0.4]), np.array(g.faraday_pass(two_mode(), "spin", "light", 0.5, 1.0).cov),
                        ("spin", "light"))
    c, sn = math.cos(theta), math.sin(theta)
    t = np.eye(4)
    t[2, 0], t[2, 1], t[0, 3], t[1, 3] = -k * sn, k * c, k * c, k * sn
    out = g.faraday_pass(s, "spin", "light", k, theta)
    assert np.allclose(out.cov, t @ s.cov @ t.T, atol=1e-12)
    assert np.allclose(out.mean, t @ s.mean, atol=1e-12)
    r = np.eye(4)
    r[2:, 2:] = [[math.cos(rot), math.sin(rot)], [-math.sin(rot), math.cos(rot)]]
    out = g.quadrature_rotation(s, "light", rot)
    assert np.allclose(out.cov, r @ s.cov @ r.T, atol=1e-12)
