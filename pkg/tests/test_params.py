import math

import pytest
from hypothesis import given, strategies as st

from tatsqueeze.errors import ParameterError
from tatsqueeze.params import (PhysicalParams, derive_coupling, larmor_field, scattering_loss,
                               tat_magnetic_field, total_crossing_loss)
from scipy import constants


def test_coupling_calibrated_reference_point():
    c = derive_coupling(PhysicalParams(eta_tilde=0.26, optical_depth=50), 3)
    assert c.kappa2 == pytest.approx(4.333333333333, rel=1e-12)
    assert round(c.kappa, 2) == 2.08


def test_coupling_zero_decay_gives_zero_coupling():
    assert derive_coupling(PhysicalParams(eta_tilde=0.0), 3).kappa == 0.0


def test_coupling_four_passes():
    c = derive_coupling(PhysicalParams(eta_tilde=0.12, optical_depth=100), 4)
    assert c.kappa2 == pytest.approx(3.0, rel=1e-14)


def test_coupling_chi_relation_is_exact():
    p = PhysicalParams(eta_tilde=0.2, optical_depth=30, n_atoms=3e11)
    c = derive_coupling(p, 3)
    assert c.chi2 * c.mean_jx_in == pytest.approx(c.kappa2, rel=1e-15)
    assert c.mean_jx_in == 1.5e11


def test_formula_convention_is_quarter_of_eta_alpha():
    p = PhysicalParams(eta_tilde=0.3, optical_depth=40, convention="formula")
    assert derive_coupling(p, 3).kappa2 == pytest.approx(0.1 * 40 / 4)


def test_explicit_coupling_override():
    p = PhysicalParams(eta_tilde=0.0, kappa2=2.5)
    assert derive_coupling(p, 5).kappa2 == 2.5


def test_coupling_rejects_single_pass():
    with pytest.raises(ParameterError):
        derive_coupling(PhysicalParams(), 1)


@pytest.mark.parametrize("field,value", [
    ("eta_tilde", 1.0), ("eta_tilde", -0.1), ("optical_depth", 0.0), ("n_atoms", -1.0),
    ("beam_angle", math.pi / 2), ("wall_reflectivity", 0.5), ("loss", 1.0), ("convention", "other"),
    ("kappa2", -1.0), ("pulse_duration", 0.0),
])
def test_params_bounds(field, value):
    with pytest.raises(ParameterError):
        PhysicalParams(**{field: value})


@given(st.floats(0.001, 0.49), st.floats(0.1, 1000), st.integers(2, 40))
def test_coupling_homogeneous_in_decay(eta, alpha0, n):
    a = derive_coupling(PhysicalParams(eta_tilde=eta, optical_depth=alpha0), n).kappa2
    b = derive_coupling(PhysicalParams(eta_tilde=2 * eta, optical_depth=alpha0), n).kappa2
    assert b == pytest.approx(2 * a, rel=1e-14)


@given(st.floats(0.001, 0.9), st.floats(0.1, 1000), st.integers(2, 40), st.integers(2, 40))
def test_coupling_times_passes_independent_of_passes(eta, alpha0, n1, n2):
    p = PhysicalParams(eta_tilde=eta, optical_depth=alpha0)
    assert derive_coupling(p, n1).kappa2 * n1 == pytest.approx(derive_coupling(p, n2).kappa2 * n2, rel=1e-13)


def test_scattering_loss_reference_experiment():
    eps = scattering_loss(PhysicalParams(n_atoms=2.0e12, eta_tilde=0.26), 1.0e14, 3)
    assert eps == pytest.approx(1.7333e-3, rel=1e-4)
    assert eps < 2.0e-3


def test_scattering_loss_values():
    assert scattering_loss(PhysicalParams(eta_tilde=0.0), 1e14) == 0.0
    assert scattering_loss(PhysicalParams(n_atoms=1e12, eta_tilde=0.3), 1e14, 3) == pytest.approx(1.0e-3)
    with pytest.raises(ParameterError):
        scattering_loss(PhysicalParams(), 0.0)


def test_total_crossing_loss():
    assert total_crossing_loss(0.0, 0.01) == pytest.approx(0.02)
    assert total_crossing_loss(0.0, 0.0) == 0.0
    assert total_crossing_loss(0.002, 0.029) == pytest.approx(0.06)
    with pytest.raises(ParameterError):
        total_crossing_loss(0.5, 0.25)


@given(st.floats(0, 0.4), st.floats(0, 0.2), st.floats(0, 0.05))
def test_crossing_loss_monotone(eps, r0, step):
    base = total_crossing_loss(eps, r0)
    assert total_crossing_loss(eps + step, r0) >= base
    assert total_crossing_loss(eps, r0 + step) >= base


def test_params_zeta_from_photons_and_walls():
    p = PhysicalParams(n_atoms=1e12, eta_tilde=0.3, n_photons=1e14, wall_reflectivity=0.01)
    assert p.zeta(3) == pytest.approx(1e-3 + 0.02)
    assert p.with_(loss=0.05).zeta(3) == 0.05


def test_tat_field_formula():
    kappa = 2.08
    rep = tat_magnetic_field(kappa ** 2, 5e-3, 0.5)
    omega = math.sqrt(3) * kappa ** 2 / (4 * 5e-3)
    assert rep.larmor_angular == pytest.approx(omega)
    assert rep.larmor_hz == pytest.approx(omega / (2 * math.pi))
    mu_b = constants.physical_constants["Bohr magneton"][0]
    assert rep.field_tesla == pytest.approx(constants.hbar * omega / (0.5 * mu_b))
    # the formula lands near 60 Hz and 0.085 mG for this coupling and duration
    assert rep.larmor_hz == pytest.approx(59.6, abs=0.1)
    assert rep.field_mgauss == pytest.approx(0.0852, abs=1e-3)


def test_tat_field_zero_and_direct():
    assert tat_magnetic_field(0.0, 5e-3).field_tesla == 0.0
    rep = tat_magnetic_field(2.0, 1e-3, 0.5)
    mu_b = constants.physical_constants["Bohr magneton"][0]
    assert rep.field_tesla == pytest.approx(math.sqrt(3) * constants.hbar * 2.0 / (4 * 0.5 * mu_b * 1e-3))
    with pytest.raises(ParameterError):
        larmor_field(1.0, 0.0)
