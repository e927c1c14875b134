"""Continuous-time moment model of the imperfect triple-pass scheme.

The spin quadratures obey a linear Langevin equation
``dS = C1 S dt + C2 dW_in + C3 dW_loss + decay noise`` whose covariance solves
the Lyapunov equation ``dSigma/dt = C1 Sigma + Sigma C1^T + D`` over one pulse
(t in [0, 1]). Loss enters through two vacuum ports, the accumulated loss
noise after the second and after the third crossing of the cell. The second
port shares its first three elementary contributions with the first, which
gives their symmetrized cross density ``cos(alpha - beta) / (2 sqrt 2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from . import kernels
from .errors import ConvergenceError, ParameterError
from .gaussian import check_physical
from .params import PhysicalParams, derive_coupling

#: RK4 and the matrix-exponential route must agree to this (relative to max |Sigma|).
CROSS_CHECK_RTOL = 1e-9


@dataclass(frozen=True)
class Controls:
    alpha: float
    beta: float
    larmor: float


@dataclass(frozen=True)
class DriftNoiseMatrices:
    c1: np.ndarray
    c2: np.ndarray
    c3: np.ndarray
    d: np.ndarray
    controls: dict
    mean_jx_in: float = 1.0


@dataclass(frozen=True)
class Propagation:
    cov: np.ndarray
    mean_jx_out: float
    mean_jx_in: float


def ideal_controls(kappa2: float) -> Controls:
    """Erasing waveplates and the Larmor rate that turns the twist into TAT."""
    return Controls(math.pi / 3, 2 * math.pi / 3, math.sqrt(3.0) * kappa2 / 4.0)


def loss_port_correlation(alpha: float, beta: float) -> np.ndarray:
    """Symmetrized spectral matrix of the two accumulated loss ports."""
    off = math.cos(alpha - beta) / (2.0 * math.sqrt(2.0))
    return np.array([[0.5, off], [off, 0.5]])


def coefficient_matrices(kappa2: float, eta_tilde: float, zeta: float, phi: float,
                         alpha: float, beta: float, larmor: float):
    """Drift C1 and the noise couplings C2 (input light) and C3 (loss ports).

    Exact in phi; first order in zeta.
    """
    if not 0.0 <= zeta < 0.5:
        raise ParameterError(f"continuous model needs 0 <= zeta < 0.5, got {zeta}")
    k = math.sqrt(kappa2)
    sp, cp = math.sin(phi), math.cos(phi)
    t1, t2 = 1.0 - zeta, 1.0 - 2.0 * zeta
    sa, sb, ca, cb = math.sin(alpha), math.sin(beta), math.cos(alpha), math.cos(beta)
    s_minus, s_plus = t1 * sa - t2 * sb, t1 * sa + t2 * sb
    c_minus, c_plus = t1 * ca - t2 * cb, t1 * ca + t2 * cb
    sab = math.sin(alpha - beta)
    c1 = -np.array([
        [0.5 * eta_tilde - 0.5 * kappa2 * t2 * math.sin(2 * phi) * sab,
         larmor - cp * kappa2 * (s_minus - t2 * cp * sab)],
        [-larmor + kappa2 * t2 * sp * sp * sab,
         0.5 * eta_tilde - sp * kappa2 * (s_plus + t2 * cp * sab)],
    ])
    c2 = k * np.array([
        [cp * s_minus, 1.0 - cp * c_minus],
        [sp * s_plus, -sp * c_plus],
    ])
    a3, b3 = math.sqrt(t1 * zeta), math.sqrt(t2 * 2.0 * zeta)
    c3 = -k * np.array([[cp * a3, -cp * b3], [sp * a3, sp * b3]])
    return c1, c2, c3


def diffusion_matrix(c2: np.ndarray, c3: np.ndarray, eta_tilde: float,
                     alpha: float, beta: float) -> np.ndarray:
    d = 0.5 * (c2 @ c2.T) + c3 @ loss_port_correlation(alpha, beta) @ c3.T + 0.5 * eta_tilde * np.eye(2)
    return 0.5 * (d + d.T)


def assemble(p: PhysicalParams, controls: Controls | Sequence[float]) -> DriftNoiseMatrices:
    """Coefficient and diffusion matrices for one parameter point.

    Args:
        p: physical parameters; loss is ``p.zeta(3)`` and the tilt ``p.beam_angle``.
        controls: ``(alpha, beta, larmor)``.
    """
    if not isinstance(controls, Controls):
        controls = Controls(*controls)
    kappa2 = derive_coupling(p, 3).kappa2
    zeta = p.zeta(3)
    c1, c2, c3 = coefficient_matrices(kappa2, p.eta_tilde, zeta, p.beam_angle,
                                      controls.alpha, controls.beta, controls.larmor)
    d = diffusion_matrix(c2, c3, p.eta_tilde, controls.alpha, controls.beta)
    info = dict(alpha=controls.alpha, beta=controls.beta, larmor=controls.larmor,
                phi=p.beam_angle, zeta=zeta, eta_tilde=p.eta_tilde, kappa=math.sqrt(kappa2))
    return DriftNoiseMatrices(c1, c2, c3, d, info, p.mean_jx)


def lyapunov_expm(drift: np.ndarray, diffusion: np.ndarray, initial: np.ndarray,
                  t: float = 1.0) -> np.ndarray:
    """Exact solution at time t via one block matrix exponential."""
    n = drift.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -drift
    block[:n, n:] = diffusion
    block[n:, n:] = drift.T
    f = expm(block * t)
    phi = f[n:, n:].T
    out = phi @ initial @ phi.T + phi @ f[:n, n:]
    return 0.5 * (out + out.T)


def rk4_steps(drift: np.ndarray) -> int:
    """Fixed RK4 step count keeping h * |C1| <= 1/200."""
    return max(256, int(math.ceil(200.0 * np.abs(drift).sum(axis=1).max())))


def propagate_covariance(m: DriftNoiseMatrices, initial: Optional[np.ndarray] = None,
                         method: str = "expm", n_steps: Optional[int] = None) -> Propagation:
    """Spin covariance at the end of the pulse, starting from a CSS by default.

    Args:
        method: ``expm`` (matrix exponential), ``rk4`` (fixed step), or
            ``both``, which runs both and insists they agree.

    Raises:
        ConvergenceError: ``both`` and the two routes differ by more than
            :data:`CROSS_CHECK_RTOL`.
        ModelViolationError: the result is not a physical covariance.
    """
    s0 = 0.5 * np.eye(2) if initial is None else np.asarray(initial, dtype=float)
    if method not in ("expm", "rk4", "both"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("expm", "both"):
        cov = lyapunov_expm(m.c1, m.d, s0)
    if method in ("rk4", "both"):
        steps = n_steps or rk4_steps(m.c1)
        cov_rk = np.asarray(kernels.rk4_lyapunov(np.ascontiguousarray(m.c1), np.ascontiguousarray(m.d),
                                                 np.ascontiguousarray(s0), steps))
        cov_rk = 0.5 * (cov_rk + cov_rk.T)
        if method == "rk4":
            cov = cov_rk
        else:
            scale = max(1.0, float(np.abs(cov).max()))
            diff = float(np.abs(cov - cov_rk).max())
            if diff > CROSS_CHECK_RTOL * scale:
                raise ConvergenceError(
                    f"RK4 with {steps} steps differs from the exact solution by {diff:.3g}"
                )
    check_physical(cov, "at end of pulse")
    eta_tilde = m.controls.get("eta_tilde", 0.0)
    return Propagation(cov, m.mean_jx_in * (1.0 - eta_tilde), m.mean_jx_in)


def covariance_trajectory(m: DriftNoiseMatrices, times: Sequence[float],
                          initial: Optional[np.ndarray] = None) -> np.ndarray:
    """Sigma(t) at each requested time, shape ``(len(times), 2, 2)``."""
    s0 = 0.5 * np.eye(2) if initial is None else np.asarray(initial, dtype=float)
    return np.array([lyapunov_expm(m.c1, m.d, s0, t) for t in times])


def spin_covariance(kappa2: float, eta_tilde: float, zeta: float, phi: float,
                    alpha: float, beta: float, larmor: float) -> np.ndarray:
    """Lean entry point for optimizers: end-of-pulse covariance from raw numbers."""
    c1, c2, c3 = coefficient_matrices(kappa2, eta_tilde, zeta, phi, alpha, beta, larmor)
    return lyapunov_expm(c1, diffusion_matrix(c2, c3, eta_tilde, alpha, beta), 0.5 * np.eye(2))
