"""Physical parameters and the dimensionless couplings derived from them.

All dynamical code works in units where the pulse duration is 1; the physical
duration only enters :func:`tat_magnetic_field`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from scipy import constants

from .errors import ParameterError

#: ``calibrated``: kappa^2 = (eta_tilde / n_passes) * alpha0.
#: ``formula``: kappa^2 = chi^2 <J_x> with chi^2 = eta * alpha0 / (2 N_at), i.e. eta * alpha0 / 4.
CONVENTIONS = ("calibrated", "formula")


@dataclass(frozen=True)
class PhysicalParams:
    """Ensemble, probe and cell parameters.

    Attributes:
        n_atoms: atom number.
        optical_depth: resonant optical depth alpha0.
        eta_tilde: total spin-decay probability per pulse (0 <= eta_tilde < 1).
        wall_reflectivity: reflectivity r0 of one cell window.
        beam_angle: angle phi between counter-propagating passes (radians).
        pulse_duration: pulse length T in seconds (reporting only).
        n_photons: photons per pulse; enables the scattering-loss estimate.
        loss: explicit photon loss per re-entry; overrides eps + 2 r0.
        convention: coupling convention, one of :data:`CONVENTIONS`.
        kappa2: explicit pulse coupling kappa^2; bypasses the convention so
            the coupling can be set independently of the decay.
    """

    n_atoms: float = 2.0e12
    optical_depth: float = 50.0
    eta_tilde: float = 0.26
    wall_reflectivity: float = 0.0
    beam_angle: float = 0.0
    pulse_duration: float = 5e-3
    n_photons: Optional[float] = None
    loss: Optional[float] = None
    convention: str = "calibrated"
    detuning: Optional[float] = None
    linewidth: Optional[float] = None
    cross_section: Optional[float] = None
    beam_area: Optional[float] = None
    kappa2: Optional[float] = None

    def __post_init__(self):
        if not self.n_atoms > 0:
            raise ParameterError(f"n_atoms must be > 0, got {self.n_atoms}")
        if not self.optical_depth > 0:
            raise ParameterError(f"optical_depth must be > 0, got {self.optical_depth}")
        if not 0.0 <= self.eta_tilde < 1.0:
            raise ParameterError(f"eta_tilde must satisfy 0 <= eta_tilde < 1, got {self.eta_tilde}")
        if not 0.0 <= self.wall_reflectivity < 0.5:
            raise ParameterError(
                f"wall_reflectivity must satisfy 0 <= r0 < 0.5, got {self.wall_reflectivity}"
            )
        if not 0.0 <= self.beam_angle < math.pi / 2:
            raise ParameterError(f"beam_angle must satisfy 0 <= phi < pi/2, got {self.beam_angle}")
        if not self.pulse_duration > 0:
            raise ParameterError(f"pulse_duration must be > 0, got {self.pulse_duration}")
        if self.n_photons is not None and not self.n_photons > 0:
            raise ParameterError(f"n_photons must be > 0, got {self.n_photons}")
        if self.loss is not None and not 0.0 <= self.loss < 1.0:
            raise ParameterError(f"loss must satisfy 0 <= zeta < 1, got {self.loss}")
        if self.kappa2 is not None and not (self.kappa2 >= 0 and math.isfinite(self.kappa2)):
            raise ParameterError(f"kappa2 must be finite and >= 0, got {self.kappa2}")
        if self.convention not in CONVENTIONS:
            raise ParameterError(f"convention must be one of {CONVENTIONS}, got {self.convention!r}")

    @property
    def mean_jx(self) -> float:
        return self.n_atoms / 2.0

    def eta(self, n_passes: int) -> float:
        """Single-pass decay parameter, eta_tilde spread evenly over the passes."""
        return self.eta_tilde / n_passes

    def zeta(self, n_passes: int = 3) -> float:
        """Loss per re-entry: the explicit override, else eps + 2 r0."""
        if self.loss is not None:
            return self.loss
        eps = 0.0 if self.n_photons is None else scattering_loss(self, self.n_photons, n_passes)
        return total_crossing_loss(eps, self.wall_reflectivity)

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class Coupling:
    chi2: float
    kappa2: float
    mean_jx_in: float

    @property
    def kappa(self) -> float:
        return math.sqrt(self.kappa2)


def derive_coupling(p: PhysicalParams, n_passes: int) -> Coupling:
    """Pulse-level coupling kappa^2 and per-atom chi^2 for an n-pass scheme."""
    if n_passes < 2:
        raise ParameterError(f"n_passes must be >= 2, got {n_passes}")
    if p.eta_tilde >= 1.0:
        raise ParameterError("eta_tilde >= 1: spin fully decayed, model invalid")
    eta = p.eta(n_passes)
    if p.kappa2 is not None:
        kappa2 = p.kappa2
    elif p.convention == "calibrated":
        kappa2 = eta * p.optical_depth
    else:
        kappa2 = eta * p.optical_depth / 4.0
    return Coupling(chi2=kappa2 / p.mean_jx, kappa2=kappa2, mean_jx_in=p.mean_jx)


def scattering_loss(p: PhysicalParams, n_photons: float, n_passes: int = 3) -> float:
    """Fraction of probe photons scattered by the atoms, N_at * eta / N_ph."""
    if not n_photons > 0:
        raise ParameterError(f"n_photons must be > 0, got {n_photons}")
    return p.n_atoms * p.eta(n_passes) / n_photons


def total_crossing_loss(eps: float, r0: float) -> float:
    """Loss for one exit/re-entry: scattering plus two window reflections."""
    if eps < 0 or r0 < 0:
        raise ParameterError(f"loss terms must be >= 0, got eps={eps}, r0={r0}")
    zeta = eps + 2.0 * r0
    if zeta >= 1.0:
        raise ParameterError(f"total crossing loss must be < 1, got {zeta}")
    return zeta


@dataclass(frozen=True)
class FieldReport:
    field_tesla: float
    larmor_angular: float  # rad/s
    larmor_hz: float

    @property
    def field_mgauss(self) -> float:
        return self.field_tesla * 1e7


def larmor_field(omega: float, pulse_duration: float, g_factor: float = 0.5) -> FieldReport:
    """Bias field giving Larmor angle ``omega`` per pulse (omega in pulse units)."""
    if not pulse_duration > 0:
        raise ParameterError(f"pulse_duration must be > 0, got {pulse_duration}")
    if not g_factor > 0:
        raise ParameterError(f"g_factor must be > 0, got {g_factor}")
    angular = omega / pulse_duration
    field = constants.hbar * angular / (g_factor * constants.physical_constants["Bohr magneton"][0])
    return FieldReport(field_tesla=field, larmor_angular=angular, larmor_hz=angular / (2 * math.pi))


def tat_magnetic_field(kappa2: float, pulse_duration: float, g_factor: float = 0.5) -> FieldReport:
    """Bias field whose Larmor precession cancels the light-induced rotation.

    B = sqrt(3) hbar kappa^2 / (4 g_F mu_B T); the matching angular Larmor
    frequency is sqrt(3) kappa^2 / (4 T).
    """
    return larmor_field(math.sqrt(3.0) * kappa2 / 4.0, pulse_duration, g_factor)
