"""Wineland squeezing parameter and closed-form reference curves."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ModelViolationError, ParameterError
from .multipass import lambda_coefficient

#: Beyond this eigenvalue ratio the squeezed variance is lost to round-off.
MAX_CONDITION = 1e10


@dataclass(frozen=True)
class SqueezingResult:
    xi2: float
    xi2_db: float
    theta_opt: float
    mean_jx_out: float


def to_db(xi2: float) -> float:
    """Squeezing in dB, positive when squeezed."""
    return -10.0 * math.log10(xi2)


def squeezed_angle(vec: np.ndarray) -> float:
    """Angle theta with ``J_theta = J_z cos(theta) - J_y sin(theta)`` along ``vec``.

    ``vec`` holds the (X_A, P_A) = (J_y, J_z) components; result in [0, pi).
    """
    theta = math.atan2(-vec[0], vec[1]) % math.pi
    # atan2 can land a hair below pi
    return 0.0 if math.isclose(theta, math.pi, abs_tol=1e-15) else theta


def xi_squared(spin_cov, mean_jx_out: float = 1.0, mean_jx_in: float = 1.0) -> SqueezingResult:
    """Wineland parameter of a normalized 2x2 spin covariance.

    The covariance is in units of the input spin length, so an untouched
    coherent state (``I / 2``) with no decay gives exactly 1. A shorter output
    spin penalizes by ``(mean_jx_in / mean_jx_out)**2``.

    Degenerate eigenvalues report ``theta_opt = 0``.

    Raises:
        ModelViolationError: non-positive or numerically unresolvable variance.
    """
    cov = np.asarray(spin_cov, dtype=float)
    if cov.shape != (2, 2):
        raise ParameterError(f"expected a 2x2 spin covariance, got shape {cov.shape}")
    if not mean_jx_out > 0 or not mean_jx_in > 0:
        raise ParameterError("spin lengths must be positive")
    lam, vec = np.linalg.eigh(0.5 * (cov + cov.T))
    if not lam[0] > 0:
        raise ModelViolationError(f"spin covariance not positive definite (min eigenvalue {lam[0]:.3g})")
    if lam[1] > MAX_CONDITION * lam[0]:
        raise ModelViolationError(
            f"spin covariance condition number {lam[1] / lam[0]:.3g} exceeds {MAX_CONDITION:.0e}"
        )
    xi2 = 2.0 * lam[0] * (mean_jx_in / mean_jx_out) ** 2
    if lam[1] - lam[0] <= 1e-12 * lam[1]:
        theta = 0.0
    else:
        theta = squeezed_angle(vec[:, 0])
    return SqueezingResult(xi2, to_db(xi2), theta, mean_jx_out)


def xi_squared_decayed(spin_cov, eta_tilde: float) -> SqueezingResult:
    """Shortcut when the spin length shrank by ``1 - eta_tilde``."""
    return xi_squared(spin_cov, 1.0 - eta_tilde, 1.0)


def dp_reference(kappa: float) -> float:
    """Double-pass squeezing parameter, lossless and without decay.

    Evaluated as ``1 - 2k^2 / ((2 + k^2) (1 + sqrt(1 + x)))`` with
    ``x = 4 / (2 + k^2)^2``, which is algebraically the textbook form but
    free of cancellation at large coupling.
    """
    if kappa < 0:
        raise ParameterError(f"kappa must be >= 0, got {kappa}")
    k2 = kappa * kappa
    x = 4.0 / (2.0 + k2) ** 2
    return 1.0 - 2.0 * k2 / ((2.0 + k2) * (1.0 + math.sqrt(1.0 + x)))


def ideal_oat_reference(kappa: float, n_passes: int = 3) -> float:
    """Pure shear ``X += mu P`` with ``mu = Lambda(N) kappa^2``.

    Smallest eigenvalue of ``[[1 + mu^2, mu], [mu, 1]] / 2``, doubled; the
    eigenvalues multiply to 1 so the small one is the reciprocal of the large.
    """
    mu = lambda_coefficient(n_passes) * kappa * kappa
    return 1.0 / (1.0 + 0.5 * mu * mu + mu * math.sqrt(1.0 + 0.25 * mu * mu))


def ideal_tat_reference(kappa: float, n_passes: int = 3) -> float:
    """Two-axis twisting: ``exp(-Lambda(N) kappa^2)``."""
    return math.exp(-lambda_coefficient(n_passes) * kappa * kappa)
