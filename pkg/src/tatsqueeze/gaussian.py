"""Gaussian states over one collective-spin mode and any number of light modes.

Quadratures are stored mode by mode, ``(x_0, p_0, x_1, p_1, ...)``, in units
where vacuum (and the coherent spin state) has covariance ``I / 2``. The spin
mode is ``X_A = J_y / sqrt(<J_x>)``, ``P_A = J_z / sqrt(<J_x>)``.

States are immutable; every operation returns a new state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import ModelViolationError, ParameterError

SPIN = "spin"
#: slack on symplectic eigenvalues >= 1/2 (plus a round-off term ~ |cov|)
PHYSICAL_ATOL = 1e-9


@dataclass(frozen=True)
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray
    mode_labels: Tuple[str, ...]

    def __post_init__(self):
        n = 2 * len(self.mode_labels)
        if self.mean.shape != (n,) or self.cov.shape != (n, n):
            raise ValueError(
                f"shape mismatch: {len(self.mode_labels)} modes but mean {self.mean.shape}, cov {self.cov.shape}"
            )
        if len(set(self.mode_labels)) != len(self.mode_labels):
            raise ValueError(f"duplicate mode labels {self.mode_labels}")
        self.mean.setflags(write=False)
        self.cov.setflags(write=False)

    @property
    def n_modes(self) -> int:
        return len(self.mode_labels)

    def index(self, mode: str) -> int:
        """Position of the x quadrature of ``mode``."""
        try:
            return 2 * self.mode_labels.index(mode)
        except ValueError:
            raise KeyError(f"unknown mode {mode!r}; have {self.mode_labels}") from None

    def block(self, mode: str) -> np.ndarray:
        i = self.index(mode)
        return self.cov[i:i + 2, i:i + 2].copy()

    def apply_linear(self, transfer: np.ndarray, noise: np.ndarray | None = None) -> "GaussianState":
        """Affine Gaussian map: ``mean -> S mean``, ``cov -> S cov S^T + noise``."""
        cov = transfer @ self.cov @ transfer.T
        if noise is not None:
            cov = cov + noise
        return GaussianState(transfer @ self.mean, 0.5 * (cov + cov.T), self.mode_labels)


def vacuum(mode_labels: Sequence[str] = (SPIN,)) -> GaussianState:
    """Vacuum light modes and a coherent spin state: zero mean, covariance ``I / 2``."""
    n = 2 * len(mode_labels)
    return GaussianState(np.zeros(n), 0.5 * np.eye(n), tuple(mode_labels))


def add_vacuum_mode(s: GaussianState, mode: str) -> GaussianState:
    if mode in s.mode_labels:
        raise ValueError(f"mode {mode!r} already present")
    n = 2 * s.n_modes
    cov = np.zeros((n + 2, n + 2))
    cov[:n, :n] = s.cov
    cov[n:, n:] = 0.5 * np.eye(2)
    return GaussianState(np.concatenate([s.mean, np.zeros(2)]), cov, s.mode_labels + (mode,))


def faraday_transfer(n_modes: int, spin_index: int, light_index: int, kappa: float, theta: float) -> np.ndarray:
    """Symplectic matrix of one Faraday pass with coupled spin axis ``theta``.

    Generated by ``kappa * (P_A cos(theta) - X_A sin(theta)) * p_L``::

        x_L += kappa (P_A cos(theta) - X_A sin(theta))
        X_A += kappa p_L cos(theta)
        P_A += kappa p_L sin(theta)

    The map is exact (the generator is a product of commuting quadratures).
    """
    c, s = math.cos(theta), math.sin(theta)
    t = np.eye(2 * n_modes)
    X, P = spin_index, spin_index + 1
    x, p = light_index, light_index + 1
    t[x, X] = -kappa * s
    t[x, P] = kappa * c
    t[X, p] = kappa * c
    t[P, p] = kappa * s
    return t


def faraday_pass(s: GaussianState, spin_mode: str, light_mode: str, kappa: float, theta: float) -> GaussianState:
    if kappa < 0:
        raise ParameterError(f"pass coupling must be >= 0, got {kappa}")
    t = faraday_transfer(s.n_modes, s.index(spin_mode), s.index(light_mode), kappa, theta)
    return s.apply_linear(t)


def rotation_transfer(n_modes: int, index: int, angle: float) -> np.ndarray:
    """``x -> x cos(a) + p sin(a)``, ``p -> p cos(a) - x sin(a)`` on one mode."""
    c, s = math.cos(angle), math.sin(angle)
    t = np.eye(2 * n_modes)
    t[index:index + 2, index:index + 2] = [[c, s], [-s, c]]
    return t


def quadrature_rotation(s: GaussianState, mode: str, angle: float) -> GaussianState:
    """Waveplate on a light mode, or Larmor precession on the spin.

    A field along x precessing the spin at rate Omega for time dt is
    ``quadrature_rotation(s, SPIN, -Omega * dt)``.
    """
    return s.apply_linear(rotation_transfer(s.n_modes, s.index(mode), angle))


def loss_channel(s: GaussianState, mode: str, zeta: float) -> GaussianState:
    """Beam splitter with transmission ``1 - zeta`` mixing in vacuum."""
    if not 0.0 <= zeta <= 1.0:
        raise ParameterError(f"loss must be in [0, 1], got {zeta}")
    i = s.index(mode)
    t = np.eye(2 * s.n_modes)
    t[i, i] = t[i + 1, i + 1] = math.sqrt(1.0 - zeta)
    noise = np.zeros_like(t)
    noise[i, i] = noise[i + 1, i + 1] = 0.5 * zeta
    return s.apply_linear(t, noise)


def spin_decay_step(s: GaussianState, eta_tilde: float, dt: float) -> GaussianState:
    """Spin damping over ``dt`` (pulse units) with its Langevin noise.

    Means shrink by ``1 - eta dt / 2``; the spin block relaxes towards the
    coherent-spin level, ``(1 - eta dt) block + (eta dt / 2) I``. Correlations
    with other modes shrink by ``sqrt(1 - eta dt)``, which makes the step an
    exact damping channel (physical for any step size).
    """
    rate = eta_tilde * dt
    if rate < 0:
        raise ParameterError(f"eta_tilde * dt must be >= 0, got {rate}")
    if rate > 0.5:
        raise ParameterError(f"eta_tilde * dt = {rate} > 0.5: step too coarse")
    i = s.index(SPIN)
    amp = 1.0 - 0.5 * rate
    mean = s.mean.copy()
    mean[i:i + 2] *= amp
    cov = s.cov.copy()
    cross = math.sqrt(1.0 - rate)
    cov[i:i + 2, :] *= cross
    cov[:, i:i + 2] *= cross
    cov[i:i + 2, i:i + 2] = (1.0 - rate) * s.cov[i:i + 2, i:i + 2] + 0.5 * rate * np.eye(2)
    return GaussianState(mean, cov, s.mode_labels)


def partial_trace(s: GaussianState, mode: str) -> GaussianState:
    if mode == SPIN:
        raise ValueError("cannot trace out the spin mode")
    if s.n_modes < 2:
        raise ValueError("need at least two modes to trace one out")
    i = s.index(mode)
    keep = [k for k in range(2 * s.n_modes) if k not in (i, i + 1)]
    labels = tuple(m for m in s.mode_labels if m != mode)
    return GaussianState(s.mean[keep].copy(), s.cov[np.ix_(keep, keep)].copy(), labels)


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigenvalues(s: GaussianState | np.ndarray) -> np.ndarray:
    """Sorted symplectic spectrum; all values are 1/2 iff the state is pure.

    Raises:
        ModelViolationError: the covariance is not positive definite.
    """
    cov = s.cov if isinstance(s, GaussianState) else np.asarray(s)
    n = cov.shape[0] // 2
    if np.linalg.eigvalsh(0.5 * (cov + cov.T))[0] <= 0:
        raise ModelViolationError("covariance is not positive definite")
    if n == 1:
        return np.array([math.sqrt(cov[0, 0] * cov[1, 1] - cov[0, 1] * cov[1, 0])])
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ cov))
    return np.sort(ev)[::2]


def check_physical(s: GaussianState | np.ndarray, context: str = "") -> None:
    cov = s.cov if isinstance(s, GaussianState) else np.asarray(s)
    if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * max(1.0, float(np.abs(cov).max()))):
        raise ModelViolationError(f"covariance not symmetric {context}".strip())
    nu = symplectic_eigenvalues(cov)
    tol = PHYSICAL_ATOL + 1e-13 * float(np.abs(cov).max())
    if nu.min() < 0.5 - tol:
        raise ModelViolationError(
            f"symplectic eigenvalue {nu.min():.12g} < 1/2 {context}".strip()
        )
