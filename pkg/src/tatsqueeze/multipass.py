"""Slice-by-slice simulation of an N-pass Faraday scheme.

The pulse is cut into M segments. Each segment meets a fresh vacuum light mode,
makes all N passes back to back (loop delays are negligible against the Larmor
period), and is traced out; the spin then decays for ``1/M`` of the pulse.
Larmor precession over the segment is split symmetrically, half a step before
the passes and half after, which keeps the O(1/M) splitting error small. Per-segment coupling is ``kappa / sqrt(M)``, so the white-noise
limit is reached as M grows.

Photon loss ``zeta`` acts on the light before every re-entry (passes 2..N). It
removes the same fraction of the classical probe, so pass ``k`` couples with
``kappa * (1 - zeta)**((k - 1) / 2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from . import gaussian as g
from . import kernels
from .errors import ConvergenceError, ModelViolationError, ParameterError
from .params import PhysicalParams, derive_coupling

SCHEME_KINDS = ("DP", "OAT", "TAT", "N_PASS")


@dataclass(frozen=True)
class SchemeConfig:
    """Geometry and controls of one multi-pass scheme.

    ``pass_axes[k]`` is the spin axis theta seen by pass k: the pass couples
    ``J_theta = J_z cos(theta) - J_y sin(theta)`` to the light, which also
    encodes the propagation direction (theta = pi for a reversed pass) and the
    beam tilt phi. ``rotation_angles[k]`` is the waveplate between passes
    k and k+1, in the ``x -> x cos + p sin`` convention.
    """

    n_passes: int
    rotation_angles: Tuple[float, ...]
    pass_axes: Tuple[float, ...]
    larmor: float = 0.0
    loss_per_crossing: float = 0.0
    scheme_kind: str = "N_PASS"

    def __post_init__(self):
        object.__setattr__(self, "rotation_angles", tuple(float(a) for a in self.rotation_angles))
        object.__setattr__(self, "pass_axes", tuple(float(a) for a in self.pass_axes))
        if self.n_passes < 2:
            raise ParameterError(f"n_passes must be >= 2, got {self.n_passes}")
        if len(self.rotation_angles) != self.n_passes - 1:
            raise ParameterError(
                f"need {self.n_passes - 1} rotation angles, got {len(self.rotation_angles)}"
            )
        if len(self.pass_axes) != self.n_passes:
            raise ParameterError(f"need {self.n_passes} pass axes, got {len(self.pass_axes)}")
        if not 0.0 <= self.loss_per_crossing <= 1.0:
            raise ParameterError(f"loss_per_crossing must be in [0, 1], got {self.loss_per_crossing}")
        if self.scheme_kind not in SCHEME_KINDS:
            raise ParameterError(f"scheme_kind must be one of {SCHEME_KINDS}")
        if self.scheme_kind == "TAT" and not self.larmor > 0:
            raise ParameterError("TAT schemes need a positive Larmor rate")
        if self.scheme_kind in ("OAT", "DP") and self.larmor != 0:
            raise ParameterError(f"{self.scheme_kind} schemes run without Larmor precession")


def double_pass(loss: float = 0.0) -> SchemeConfig:
    """Two passes, the second reversed, with a quarter-wave rotation between."""
    return SchemeConfig(2, (math.pi / 2,), (0.0, math.pi), 0.0, loss, "DP")


def triple_pass(alpha: float = math.pi / 3, beta: float = 2 * math.pi / 3, larmor: float = 0.0,
                phi: float = 0.0, loss: float = 0.0) -> SchemeConfig:
    """Forward, reversed (tilted by phi), forward (tilted by -phi).

    ``alpha`` and ``beta`` are the cumulative waveplate phases before the second
    and third pass, so the second waveplate contributes ``beta - alpha``.
    """
    kind = "TAT" if larmor > 0 else ("OAT" if larmor == 0 else "N_PASS")
    return SchemeConfig(3, (alpha, beta - alpha), (0.0, math.pi + phi, 2 * math.pi - phi),
                        larmor, loss, kind)


def ring(n_passes: int, larmor: float = 0.0, loss: float = 0.0) -> SchemeConfig:
    """N co-propagating passes with the Stokes vector turned by 2 pi / N each time.

    The turn is counter-clockwise in the (x_L, p_L) plane, i.e. angle
    ``-2 pi / N`` in the waveplate convention; this is the sense that makes the
    accumulated twist positive.
    """
    if n_passes < 3:
        raise ParameterError(f"ring erasure needs n_passes >= 3, got {n_passes}")
    step = -2 * math.pi / n_passes
    return SchemeConfig(n_passes, (step,) * (n_passes - 1), (0.0,) * n_passes, larmor, loss, "N_PASS")


def lambda_coefficient(n_passes: int) -> float:
    """Accumulated one-axis-twisting coefficient, by explicit summation.

    Equals ``(N / 2) cot(pi / N)``.
    """
    if n_passes < 3:
        raise ParameterError(f"n_passes must be >= 3, got {n_passes}")
    th = 2 * math.pi / n_passes
    return math.fsum((n_passes - n) * math.sin(n * th) for n in range(1, n_passes))


def tat_larmor_rate(n_passes: int, kappa2: float) -> float:
    """Larmor rate that cancels the light-induced rotation (pulse units)."""
    return 0.5 * lambda_coefficient(n_passes) * kappa2


@dataclass(frozen=True)
class SimOutput:
    spin_state: g.GaussianState
    mean_jx_out: float
    light_spin_leak: float
    m_segments: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def spin_cov(self) -> np.ndarray:
        return self.spin_state.cov


def pass_couplings(kappa: float, c: SchemeConfig, m_segments: int) -> np.ndarray:
    """Per-segment coupling of every pass, including classical probe depletion."""
    t = 1.0 - c.loss_per_crossing
    k = np.arange(c.n_passes)
    return kappa / math.sqrt(m_segments) * np.sqrt(t ** k)


def _check_segments(p: PhysicalParams, m_segments: int) -> None:
    if m_segments < 1:
        raise ParameterError(f"m_segments must be >= 1, got {m_segments}")
    if p.eta_tilde / m_segments > 0.5:
        raise ParameterError(f"eta_tilde / M = {p.eta_tilde / m_segments} > 0.5: use more segments")


def simulate(p: PhysicalParams, c: SchemeConfig, m_segments: int,
             initial: g.GaussianState | None = None, engine: str = "auto") -> SimOutput:
    """Brute-force run over all segments (compiled kernel when available).

    Raises:
        ModelViolationError: the final spin covariance is not physical.
    """
    _check_segments(p, m_segments)
    kappa = derive_coupling(p, c.n_passes).kappa
    s0 = g.vacuum() if initial is None else initial
    impl = kernels.get(engine)
    cov, mean, leak = impl.run_segments(
        np.ascontiguousarray(s0.cov, dtype=float),
        np.ascontiguousarray(s0.mean, dtype=float),
        pass_couplings(kappa, c, m_segments),
        np.asarray(c.pass_axes, dtype=float),
        np.asarray(c.rotation_angles, dtype=float),
        1.0 - c.loss_per_crossing,
        c.larmor / m_segments,
        p.eta_tilde / m_segments,
        int(m_segments),
    )
    state = g.GaussianState(np.asarray(mean), np.asarray(cov), (g.SPIN,))
    g.check_physical(state, f"after {m_segments} segments")
    return SimOutput(state, p.mean_jx * (1.0 - p.eta_tilde), float(leak), m_segments)


def simulate_reference(p: PhysicalParams, c: SchemeConfig, m_segments: int,
                       initial: g.GaussianState | None = None) -> SimOutput:
    """Same model assembled from :mod:`gaussian` operations, checked every segment.

    Slow; used to validate the kernels.
    """
    _check_segments(p, m_segments)
    kappa = derive_coupling(p, c.n_passes).kappa
    ks = pass_couplings(kappa, c, m_segments)
    dt = 1.0 / m_segments
    s = g.vacuum() if initial is None else initial
    leak = 0.0
    for m in range(m_segments):
        s = g.quadrature_rotation(s, g.SPIN, -0.5 * c.larmor * dt)
        s = g.add_vacuum_mode(s, "light")
        s = g.faraday_pass(s, g.SPIN, "light", ks[0], c.pass_axes[0])
        for k in range(1, c.n_passes):
            s = g.quadrature_rotation(s, "light", c.rotation_angles[k - 1])
            s = g.loss_channel(s, "light", c.loss_per_crossing)
            s = g.faraday_pass(s, g.SPIN, "light", ks[k], c.pass_axes[k])
        g.check_physical(s, f"in segment {m}")
        leak = max(leak, float(np.abs(s.cov[2:, :2]).max()))
        s = g.partial_trace(s, "light")
        s = g.quadrature_rotation(s, g.SPIN, -0.5 * c.larmor * dt)
        s = g.spin_decay_step(s, p.eta_tilde, dt)
    return SimOutput(s, p.mean_jx * (1.0 - p.eta_tilde), leak, m_segments)


def segment_map(p: PhysicalParams, c: SchemeConfig, m_segments: int) -> Tuple[np.ndarray, np.ndarray]:
    """One segment as an affine map on the spin covariance, ``S -> A S A^T + B``.

    Exactly the map :func:`simulate` applies M times, assembled once.
    """
    _check_segments(p, m_segments)
    kappa = derive_coupling(p, c.n_passes).kappa
    ks = pass_couplings(kappa, c, m_segments)
    t = np.eye(4)
    noise = np.zeros((4, 4))
    zeta = c.loss_per_crossing
    loss_t = np.diag([1.0, 1.0, math.sqrt(1 - zeta), math.sqrt(1 - zeta)])
    loss_n = np.diag([0.0, 0.0, 0.5 * zeta, 0.5 * zeta])
    for k in range(c.n_passes):
        if k > 0:
            r = g.rotation_transfer(2, 2, c.rotation_angles[k - 1])
            t, noise = r @ t, r @ noise @ r.T
            t, noise = loss_t @ t, loss_t @ noise @ loss_t + loss_n
        f = g.faraday_transfer(2, 0, 2, ks[k], c.pass_axes[k])
        t, noise = f @ t, f @ noise @ f.T
    # light enters as vacuum
    b = t[:2, 2:] @ (0.5 * t[:2, 2:].T) + noise[:2, :2]
    rate = p.eta_tilde / m_segments
    lar = g.rotation_transfer(1, 0, -0.5 * c.larmor / m_segments)
    a = math.sqrt(1.0 - rate) * (lar @ t[:2, :2] @ lar)
    b = (1.0 - rate) * (lar @ b @ lar.T) + 0.5 * rate * np.eye(2)
    return a, 0.5 * (b + b.T)


def iterate_affine(a: np.ndarray, b: np.ndarray, initial: np.ndarray, n: int) -> np.ndarray:
    """Apply ``S -> A S A^T + B`` n times by binary powering."""
    res_a, res_b = np.eye(2), np.zeros((2, 2))
    pa, pb = a, b
    while n:
        if n & 1:
            res_b = pa @ res_b @ pa.T + pb
            res_a = pa @ res_a
        pb = pa @ pb @ pa.T + pb
        pa = pa @ pa
        n >>= 1
    out = res_a @ initial @ res_a.T + res_b
    return 0.5 * (out + out.T)


def spin_covariance(p: PhysicalParams, c: SchemeConfig, m_segments: int) -> np.ndarray:
    """Final spin covariance of :func:`simulate` in O(log M) work, starting from a CSS."""
    a, b = segment_map(p, c, m_segments)
    with np.errstate(over="ignore", invalid="ignore"):
        out = iterate_affine(a, b, 0.5 * np.eye(2), m_segments)
    if not np.all(np.isfinite(out)):
        raise ModelViolationError(f"spin covariance overflowed at M = {m_segments}")
    return out


def converged_spin_covariance(p: PhysicalParams, c: SchemeConfig, m_start: int = 256,
                              rtol: float = 1e-4, m_max: int = 2 ** 26) -> Tuple[np.ndarray, int]:
    """Double M until the smallest spin eigenvalue changes by less than ``rtol``.

    Raises:
        ConvergenceError: ``m_max`` reached first.
        ModelViolationError: the smallest eigenvalue is not resolvable in
            double precision, so no M can settle it.
    """
    from .metrics import MAX_CONDITION

    def smallest(cov):
        lam = np.linalg.eigvalsh(cov)
        if not lam[0] > 0 or lam[1] > MAX_CONDITION * lam[0]:
            raise ModelViolationError(f"spin covariance eigenvalues {lam[0]:.3g}, {lam[1]:.3g} not resolvable")
        return lam[0]

    m = m_start
    prev = spin_covariance(p, c, m)
    prev_min = smallest(prev)
    while m < m_max:
        m *= 2
        cur = spin_covariance(p, c, m)
        cur_min = smallest(cur)
        if abs(cur_min - prev_min) <= rtol * abs(cur_min):
            return cur, m
        prev, prev_min = cur, cur_min
    raise ConvergenceError(f"segment count did not converge by M = {m_max}")
