"""Run configuration: ``key = value`` files plus command-line overrides."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

from .errors import ParameterError
from .params import CONVENTIONS, PhysicalParams

COMMANDS = ("single", "dp", "oat", "tat", "npass", "fig3a", "fig3b", "fig4b", "fig4c", "calibrate")
FORMATS = ("csv", "json")
OPTIMIZE = ("none", "controls", "all")
MODELS = ("auto", "continuous", "discrete")


class ConfigError(ParameterError):
    """Bad configuration key or value."""


@dataclass(frozen=True)
class Key:
    kind: type
    symbol: str
    help: str
    lo: Optional[float] = None
    hi: Optional[float] = None
    lo_open: bool = False
    hi_open: bool = False
    choices: Optional[Tuple[str, ...]] = None

    def bound_text(self, name: str) -> str:
        if self.choices:
            return f"{name} must be one of {', '.join(self.choices)}"
        parts = []
        if self.lo is not None:
            parts.append(f"{self.lo:g} {'<' if self.lo_open else '<='} ")
        parts.append(name)
        if self.hi is not None:
            parts.append(f" {'<' if self.hi_open else '<='} {self.hi:g}")
        return "must satisfy " + "".join(parts)

    def parse(self, name: str, raw: Any):
        if self.kind is str:
            value = str(raw).strip()
            if self.choices and value not in self.choices:
                raise ConfigError(f"{name} = {value!r}: {self.bound_text(name)}")
            return value
        try:
            value = self.kind(raw) if self.kind is float else int(str(raw).strip())
        except (TypeError, ValueError):
            raise ConfigError(f"{name} = {raw!r}: expected {self.kind.__name__}") from None
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError(f"{name} = {raw!r}: must be finite")
        bad_lo = self.lo is not None and (value <= self.lo if self.lo_open else value < self.lo)
        bad_hi = self.hi is not None and (value >= self.hi if self.hi_open else value > self.hi)
        if bad_lo or bad_hi:
            raise ConfigError(f"{name} = {value!r} out of range: {self.bound_text(name)}")
        return value


KEYS: Dict[str, Key] = {
    "command": Key(str, "-", "what to run", choices=COMMANDS),
    "n_atoms": Key(float, "N_at", "atom number", lo=0.0, lo_open=True),
    "alpha0": Key(float, "alpha_0", "resonant optical depth", lo=0.0, lo_open=True),
    "eta": Key(float, "eta~", "spin-decay probability per pulse (sets the photon number)",
               lo=0.0, hi=1.0, hi_open=True),
    "r0": Key(float, "r_0", "reflectivity of one cell window", lo=0.0, hi=0.5, hi_open=True),
    "zeta": Key(float, "zeta", "photon loss per cell re-entry; overrides eps + 2 r_0",
                lo=0.0, hi=1.0, hi_open=True),
    "phi": Key(float, "phi", "angle between counter-propagating passes (rad)",
               lo=0.0, hi=math.pi / 2, hi_open=True),
    "pulse_duration": Key(float, "T", "pulse duration in seconds (field report only)", lo=0.0, lo_open=True),
    "n_photons": Key(float, "N_ph", "photons per pulse; sets the scattering loss eps", lo=0.0, lo_open=True),
    "convention": Key(str, "kappa^2", "coupling convention", choices=CONVENTIONS),
    "kappa": Key(float, "kappa", "pulse coupling; overrides the convention (decay still from eta)", lo=0.0),
    "g_factor": Key(float, "g_F", "Lande g-factor (field report only)", lo=0.0, lo_open=True),
    "n_passes": Key(int, "N", "number of passes through the cell", lo=2, hi=10000),
    "alpha": Key(float, "alpha", "waveplate phase before the second pass (rad)"),
    "beta": Key(float, "beta", "cumulative waveplate phase before the third pass (rad)"),
    "omega": Key(float, "Omega", "Larmor angle per pulse (rad); overrides larmor_ratio"),
    "larmor_ratio": Key(float, "Omega/Omega_TAT", "Larmor rate relative to the TAT rate", lo=0.0),
    "optimize": Key(str, "-", "single-point commands: none, controls (alpha, beta, Omega) or all (also eta~)",
                    choices=OPTIMIZE),
    "model": Key(str, "-", "dynamics model", choices=MODELS),
    "segments": Key(int, "M", "pulse segments of the discrete model (default: converged)", lo=1, hi=2 ** 26),
    "workers": Key(int, "-", "worker processes for sweeps", lo=1, hi=256),
    "format": Key(str, "-", "output format", choices=FORMATS),
    "output": Key(str, "-", "output file (default: stdout)"),
}

#: keys a command cannot run without (besides ``command``)
REQUIRED = {"single": ("n_passes",), "npass": ("n_passes",)}


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: PhysicalParams
    n_passes: Optional[int] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    omega: Optional[float] = None
    larmor_ratio: Optional[float] = None
    optimize: str = "none"
    model: str = "auto"
    segments: Optional[int] = None
    workers: int = 1
    format: str = "csv"
    output: Optional[str] = None
    g_factor: float = 0.5
    raw: Mapping[str, Any] = field(default_factory=dict)


def read_config_text(text: str) -> Dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def read_config_file(path: str) -> Dict[str, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            return read_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"config file {path!r} is not UTF-8") from None


def parse_config(values: Mapping[str, Any], overrides: Mapping[str, Any] = ()) -> RunConfig:
    """Validate merged settings (``overrides`` win) into a :class:`RunConfig`.

    Raises:
        ConfigError: unknown key, missing required key, or value out of range.
    """
    merged = dict(values)
    merged.update({k: v for k, v in dict(overrides).items() if v is not None})
    unknown = sorted(set(merged) - set(KEYS))
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
    v = {k: KEYS[k].parse(k, raw) for k, raw in merged.items()}
    if "command" not in v:
        raise ConfigError(f"missing required key 'command' (one of {', '.join(COMMANDS)})")
    cmd = v["command"]
    for key in REQUIRED.get(cmd, ()):
        if key not in v:
            raise ConfigError(f"command {cmd!r} needs key {key!r}")
    if cmd == "npass" and v["n_passes"] < 3:
        raise ConfigError("n_passes = %d out of range: npass needs 3 <= n_passes" % v["n_passes"])

    param_keys = dict(n_atoms="n_atoms", alpha0="optical_depth", eta="eta_tilde", r0="wall_reflectivity",
                      zeta="loss", phi="beam_angle", pulse_duration="pulse_duration",
                      n_photons="n_photons", convention="convention")
    try:
        fields = {param_keys[k]: v[k] for k in param_keys if k in v}
        if "kappa" in v:
            fields["kappa2"] = v["kappa"] ** 2
        params = PhysicalParams(**fields)
        # derived loss must stay < 1 as well
        params.zeta(v.get("n_passes", 3))
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(
        command=cmd, params=params, n_passes=v.get("n_passes"), alpha=v.get("alpha"), beta=v.get("beta"),
        omega=v.get("omega"), larmor_ratio=v.get("larmor_ratio"), optimize=v.get("optimize", "none"),
        model=v.get("model", "auto"), segments=v.get("segments"), workers=v.get("workers", 1),
        format=v.get("format", "csv"), output=v.get("output"), g_factor=v.get("g_factor", 0.5),
        raw=dict(merged),
    )
