"""Control optimization and the figure datasets.

Controls of a point are ``eta_tilde``, the waveplate phases ``alpha`` and
``beta`` (triple pass only) and ``larmor_ratio``, the Larmor rate in units of
the TAT rate ``Lambda(N) kappa^2 / 2``. Triple-pass points use the continuous
model; every other pass count uses the discrete one, at a segment count
fixed by a doubling pre-check and re-verified at the optimum.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import continuous as ct
from . import multipass as mp
from .errors import ConvergenceError, ModelViolationError, ParameterError
from .metrics import SqueezingResult, xi_squared
from .params import PhysicalParams, derive_coupling

ETA_RANGE = (0.01, 0.6)
#: half-width of the waveplate-phase search around the ideal values
PHASE_HALF_WIDTH = math.pi / 6
LARMOR_RATIO_RANGE = (0.0, 2.0)
#: coarse-grid points per coordinate: eta, alpha, beta, larmor ratio
GRID = dict(eta_tilde=8, alpha=3, beta=3, larmor_ratio=5)
FTOL = 1e-6
MAX_CYCLES = 60
#: discrete model: relative change of lambda_min accepted between M and 2M
SEGMENT_RTOL = 1e-4
SEGMENT_START = 256
SEGMENT_MAX = 2 ** 24

FIG3A_ETAS = tuple(np.round(np.linspace(0.02, 0.6, 30), 10))
FIG3_ZETAS = (0.0, 0.02, 0.06)
FIG3_PHI = 0.05
FIG3B_DEPTHS = tuple(np.round(np.geomspace(10, 500, 12), 6))
FIG4B_PASSES = (3, 4, 7)
FIG4C_PASSES = tuple(range(3, 41))
FIG4C_LOSSES = (0.0, 0.005, 0.01)

MODELS = ("auto", "continuous", "discrete")
KINDS = ("DP", "OAT", "TAT", "N_PASS")


@dataclass(frozen=True)
class Scheme:
    """What is being optimized.

    Attributes:
        kind: DP, OAT (no Larmor field), TAT or N_PASS (ring, Larmor free).
        n_passes: pass count; DP forces 2.
        free_phases: optimize alpha, beta (triple pass) instead of fixing them ideal.
        free_larmor: optimize the Larmor ratio instead of fixing it (1 for TAT, 0 for OAT).
    """

    kind: str = "TAT"
    n_passes: int = 3
    free_phases: bool = True
    free_larmor: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"scheme kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "DP" and self.n_passes != 2:
            object.__setattr__(self, "n_passes", 2)
        if self.kind != "DP" and self.n_passes < 3:
            raise ParameterError(f"{self.kind} needs n_passes >= 3, got {self.n_passes}")
        if self.kind in ("DP", "OAT"):
            object.__setattr__(self, "free_larmor", False)
        if self.kind == "DP" or self.n_passes != 3:
            object.__setattr__(self, "free_phases", False)


def resolve_model(scheme: Scheme, model: str) -> str:
    if model not in MODELS:
        raise ParameterError(f"model must be one of {MODELS}, got {model!r}")
    if model == "auto":
        return "continuous" if scheme.n_passes == 3 and scheme.kind != "DP" else "discrete"
    if model == "continuous" and (scheme.n_passes != 3 or scheme.kind == "DP"):
        raise ParameterError("the continuous model covers the triple-pass scheme only")
    return model


def default_controls(scheme: Scheme, eta_tilde: float) -> Dict[str, float]:
    ratio = 0.0 if scheme.kind in ("DP", "OAT") else 1.0
    out = dict(eta_tilde=eta_tilde, larmor_ratio=ratio)
    if scheme.n_passes == 3 and scheme.kind != "DP":
        out.update(alpha=math.pi / 3, beta=2 * math.pi / 3)
    return out


def larmor_rate(p: PhysicalParams, scheme: Scheme, ratio: float) -> float:
    if scheme.kind == "DP" or ratio == 0:
        return 0.0
    return ratio * mp.tat_larmor_rate(scheme.n_passes, derive_coupling(p, scheme.n_passes).kappa2)


def scheme_config(p: PhysicalParams, scheme: Scheme, controls: Dict[str, float]) -> mp.SchemeConfig:
    """Discrete-model configuration for one set of controls."""
    zeta = p.zeta(scheme.n_passes)
    if scheme.kind == "DP":
        return mp.double_pass(zeta)
    omega = larmor_rate(p, scheme, controls["larmor_ratio"])
    if scheme.n_passes == 3:
        cfg = mp.triple_pass(controls["alpha"], controls["beta"], omega, p.beam_angle, zeta)
    else:
        cfg = mp.ring(scheme.n_passes, omega, zeta)
    return cfg


def evaluate(p: PhysicalParams, scheme: Scheme, controls: Dict[str, float], model: str = "auto",
             m_segments: Optional[int] = None) -> SqueezingResult:
    """Squeezing of one fully specified point (``controls['eta_tilde']`` overrides ``p``).

    Raises:
        ModelViolationError: non-physical or unresolvable spin covariance.
    """
    model = resolve_model(scheme, model)
    q = p.with_(eta_tilde=float(controls["eta_tilde"]))
    if model == "continuous":
        kappa2 = derive_coupling(q, 3).kappa2
        cov = ct.spin_covariance(kappa2, q.eta_tilde, q.zeta(3), q.beam_angle, controls["alpha"],
                                 controls["beta"], larmor_rate(q, scheme, controls["larmor_ratio"]))
    else:
        if m_segments is None:
            raise ParameterError("the discrete model needs m_segments")
        cov = mp.spin_covariance(q, scheme_config(q, scheme, controls), m_segments)
    return xi_squared(cov, q.mean_jx * (1.0 - q.eta_tilde), q.mean_jx)


@dataclass(frozen=True)
class PointResult:
    controls: Dict[str, float]
    result: SqueezingResult
    model: str
    m_segments: Optional[int]
    converged: bool
    n_evals: int

    @property
    def xi2(self) -> float:
        return self.result.xi2

    @property
    def xi2_db(self) -> float:
        return self.result.xi2_db


def _variables(scheme: Scheme, vary_eta: bool):
    names, bounds, grid = [], [], []
    if vary_eta:
        names.append("eta_tilde"), bounds.append(ETA_RANGE), grid.append(GRID["eta_tilde"])
    if scheme.free_phases:
        for name, centre in (("alpha", math.pi / 3), ("beta", 2 * math.pi / 3)):
            names.append(name)
            bounds.append((centre - PHASE_HALF_WIDTH, centre + PHASE_HALF_WIDTH))
            grid.append(GRID[name])
    if scheme.free_larmor:
        names.append("larmor_ratio"), bounds.append(LARMOR_RATIO_RANGE), grid.append(GRID["larmor_ratio"])
    return names, bounds, grid


def _segments_for(p: PhysicalParams, scheme: Scheme, controls: Dict[str, float], m_start: int) -> int:
    q = p.with_(eta_tilde=float(controls["eta_tilde"]))
    _, m = mp.converged_spin_covariance(q, scheme_config(q, scheme, controls), m_start,
                                        SEGMENT_RTOL, SEGMENT_MAX)
    return m


def optimize_point(p: PhysicalParams, scheme: Scheme = Scheme(), model: str = "auto",
                   vary_eta: bool = True, strict: bool = False) -> PointResult:
    """Best squeezing over ``eta_tilde`` (unless fixed) and the free controls.

    The search is a coarse grid followed by golden-section line searches cycled
    until one cycle improves xi^2 by less than ``FTOL``. Infeasible or
    unresolvable points score ``inf``.

    Raises:
        ConvergenceError: ``strict`` and the cycle cap was reached; the
            best-so-far point is attached as ``err.best``.
    """
    from .optimize import coordinate_search

    model = resolve_model(scheme, model)
    base = default_controls(scheme, p.eta_tilde)
    names, bounds, grid = _variables(scheme, vary_eta)

    def controls_of(x) -> Dict[str, float]:
        out = dict(base)
        out.update({n: float(v) for n, v in zip(names, x)})
        return out

    # discrete model: optimize at a trial M, then grow M until it is converged at the optimum
    m_segments = SEGMENT_START if model == "discrete" else None

    for _ in range(12):
        def objective(x, m=m_segments):
            try:
                return evaluate(p, scheme, controls_of(x), model, m).xi2
            except (ModelViolationError, ParameterError, FloatingPointError):
                return math.inf

        if names:
            res = coordinate_search(objective, bounds, grid, ftol=FTOL, max_cycles=MAX_CYCLES)
            best, converged, n_evals = controls_of(res.x), res.converged, res.n_evals
        else:
            best, converged, n_evals = dict(base), True, 1
        if model != "discrete":
            break
        m_needed = _segments_for(p, scheme, best, m_segments // 2)
        if m_needed <= m_segments:
            break
        m_segments = m_needed

    try:
        result = evaluate(p, scheme, best, model, m_segments)
    except ModelViolationError:
        if strict:
            raise
        result = SqueezingResult(math.inf, -math.inf, 0.0, p.mean_jx * (1 - best["eta_tilde"]))
        converged = False
    point = PointResult(best, result, model, m_segments, converged, n_evals)
    if strict and not converged:
        err = ConvergenceError(f"optimizer hit {MAX_CYCLES} cycles without meeting |dxi2| < {FTOL}")
        err.best = point
        raise err
    return point


# ---------------------------------------------------------------------------
# Figure tables

@dataclass
class Row:
    x: float
    controls: Dict[str, float]
    xi2: float
    xi2_db: float
    converged: bool = True
    theta_opt: float = 0.0


@dataclass
class Series:
    label: str
    settings: Dict[str, object]
    rows: List[Row] = field(default_factory=list)


@dataclass
class SweepTable:
    name: str
    independent: str
    grid: Tuple[float, ...]
    series: List[Series]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SweepTable":
        series = [Series(s["label"], s["settings"], [Row(**r) for r in s["rows"]]) for s in d["series"]]
        return cls(d["name"], d["independent"], tuple(d["grid"]), series)

    @property
    def all_converged(self) -> bool:
        return all(r.converged for s in self.series for r in s.rows)

    def column(self, label: str, key: str = "xi2") -> np.ndarray:
        for s in self.series:
            if s.label == label:
                return np.array([getattr(r, key) for r in s.rows])
        raise KeyError(label)


@dataclass(frozen=True)
class _Job:
    params: PhysicalParams
    scheme: Scheme
    vary_eta: bool
    model: str = "auto"


def _run_job(job: _Job) -> PointResult:
    return optimize_point(job.params, job.scheme, job.model, job.vary_eta)


def _run_all(jobs: Sequence[_Job], workers: int = 1) -> List[PointResult]:
    # map() keeps submission order, so tables never depend on completion order
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_job, jobs, chunksize=1))
    return [_run_job(j) for j in jobs]


def _build(name: str, independent: str, grid: Sequence[float],
           series_specs: Sequence[Tuple[str, dict, List[_Job]]], workers: int) -> SweepTable:
    flat = [job for _, _, jobs in series_specs for job in jobs]
    results = iter(_run_all(flat, workers))
    series = []
    for label, settings, jobs in series_specs:
        rows = []
        for x in grid:
            r = next(results)
            rows.append(Row(float(x), r.controls, r.xi2, r.xi2_db, r.converged, r.result.theta_opt))
        series.append(Series(label, settings, rows))
    return SweepTable(name, independent, tuple(float(x) for x in grid), series)


def _fmt(v: float) -> str:
    return np.format_float_positional(v, trim="-")


def figure3a(base: PhysicalParams = PhysicalParams(), etas: Sequence[float] = FIG3A_ETAS,
             zetas: Sequence[float] = FIG3_ZETAS, phi: float = FIG3_PHI,
             workers: int = 1) -> SweepTable:
    """Optimized triple-pass squeezing versus decay, one series per loss."""
    specs = []
    for z in zetas:
        settings = dict(optical_depth=base.optical_depth, zeta=z, phi=phi)
        jobs = [_Job(base.with_(eta_tilde=float(e), loss=z, beam_angle=phi), Scheme("TAT", 3), False)
                for e in etas]
        specs.append((f"zeta{_fmt(z)}", settings, jobs))
    return _build("fig3a", "eta_tilde", etas, specs, workers)


def figure3b(base: PhysicalParams = PhysicalParams(), depths: Sequence[float] = FIG3B_DEPTHS,
             zetas: Sequence[float] = FIG3_ZETAS, phi: float = FIG3_PHI, inset: bool = True,
             workers: int = 1) -> SweepTable:
    """Peak squeezing versus optical depth (decay optimized per point).

    Series: the triple pass at each loss with tilt ``phi``, the perfect-geometry
    reference (no loss, no tilt), and, for the inset, the double pass and the
    triple pass at fixed ideal phases with and without the Larmor field, all
    lossless, untilted and with spin decay.
    """
    specs = []
    for z in zetas:
        jobs = [_Job(base.with_(optical_depth=float(a), loss=z, beam_angle=phi), Scheme("TAT", 3), True)
                for a in depths]
        specs.append((f"zeta{_fmt(z)}_phi{_fmt(phi)}", dict(zeta=z, phi=phi), jobs))
    ideal = dict(zeta=0.0, phi=0.0)

    def clean(a):
        return base.with_(optical_depth=float(a), loss=0.0, beam_angle=0.0)

    specs.append(("zeta0_phi0", ideal, [_Job(clean(a), Scheme("TAT", 3), True) for a in depths]))
    if inset:
        specs.append(("dp", dict(ideal, scheme="DP"), [_Job(clean(a), Scheme("DP", 2), True) for a in depths]))
        fixed = dict(free_phases=False, free_larmor=False)
        specs.append(("oat", dict(ideal, scheme="OAT"),
                      [_Job(clean(a), Scheme("OAT", 3, **fixed), True) for a in depths]))
        specs.append(("tat", dict(ideal, scheme="TAT"),
                      [_Job(clean(a), Scheme("TAT", 3, **fixed), True) for a in depths]))
    return _build("fig3b", "optical_depth", depths, specs, workers)


def figure4b(base: PhysicalParams = PhysicalParams(), depths: Sequence[float] = FIG3B_DEPTHS,
             passes: Sequence[int] = FIG4B_PASSES, workers: int = 1) -> SweepTable:
    """N-pass TAT versus optical depth, lossless and untilted, decay optimized."""
    specs = []
    for n in passes:
        jobs = [_Job(base.with_(optical_depth=float(a), loss=0.0, beam_angle=0.0), Scheme("TAT", n), True)
                for a in depths]
        specs.append((f"N{n}", dict(n_passes=n, zeta=0.0, phi=0.0), jobs))
    return _build("fig4b", "optical_depth", depths, specs, workers)


def figure4c(base: PhysicalParams = PhysicalParams(), passes: Sequence[int] = FIG4C_PASSES,
             losses: Sequence[float] = FIG4C_LOSSES, workers: int = 1) -> SweepTable:
    """N-pass TAT versus pass count at fixed optical depth, one series per loss."""
    specs = []
    for z in losses:
        jobs = [_Job(base.with_(loss=z, beam_angle=0.0), Scheme("TAT", int(n)), True) for n in passes]
        specs.append((f"loss{_fmt(z)}", dict(optical_depth=base.optical_depth, zeta=z, phi=0.0), jobs))
    return _build("fig4c", "n_passes", passes, specs, workers)
