"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 non-physical covariance,
4 optimizer non-convergence.
"""
from __future__ import annotations

import argparse
import math
import sys
from typing import Dict, List, Optional

from . import multipass as mp
from . import sweeps as sw
from .config import COMMANDS, KEYS, RunConfig, parse_config, read_config_file
from .errors import ConvergenceError, ModelViolationError, ParameterError
from .params import derive_coupling, larmor_field, scattering_loss
from .serialize import mapping_bytes, serialize

EXIT_OK, EXIT_CONFIG, EXIT_MODEL, EXIT_CONVERGENCE = 0, 2, 3, 4

_COMMAND_HELP = """commands:
  single     evaluate one point of an N-pass scheme (N=2 double pass, 3 triple pass, >3 ring)
  dp         double pass
  oat        triple pass without Larmor field
  tat        triple pass with Larmor field
  npass      ring scheme with n_passes >= 3 and Larmor field
  fig3a      optimized triple pass vs decay, per loss
  fig3b      peak squeezing vs optical depth, with ideal-protocol references
  fig4b      N-pass squeezing vs optical depth (N = 3, 4, 7)
  fig4c      N-pass squeezing vs N (N = 3..40), per loss
  calibrate  derived couplings, losses, TAT Larmor rate and bias field

Config files hold 'key = value' lines ('#' starts a comment); flags override them."""


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tatsqueeze",
        description="Multi-pass atom-light squeezing: simulation, optimization and figure tables.",
        epilog=_COMMAND_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("command_arg", nargs="?", choices=COMMANDS, metavar="COMMAND",
                    help="what to run (or set 'command' in the config file)")
    ap.add_argument("-c", "--config", help="key = value config file")
    keys = ap.add_argument_group("keys (symbol: meaning)")
    for name, key in KEYS.items():
        if name == "command":
            continue
        text = f"{key.symbol}: {key.help}" if key.symbol != "-" else key.help
        if key.choices:
            text += f" [{'|'.join(key.choices)}]"
        keys.add_argument(f"--{name}", dest=name, default=None, metavar=name.upper(), help=text)
    return ap


def _point_scheme(cfg: RunConfig) -> sw.Scheme:
    cmd = cfg.command
    if cmd == "dp":
        return sw.Scheme("DP", 2)
    if cmd == "oat":
        return sw.Scheme("OAT", 3)
    if cmd == "tat":
        return sw.Scheme("TAT", 3)
    n = cfg.n_passes
    if cmd == "single" and n == 2:
        return sw.Scheme("DP", 2)
    return sw.Scheme("TAT", n)


def _point_controls(cfg: RunConfig, scheme: sw.Scheme) -> Dict[str, float]:
    p = cfg.params
    controls = sw.default_controls(scheme, p.eta_tilde)
    if "alpha" in controls:
        if cfg.alpha is not None:
            controls["alpha"] = cfg.alpha
        if cfg.beta is not None:
            controls["beta"] = cfg.beta
    if scheme.kind == "DP" or scheme.kind == "OAT":
        if cfg.omega or cfg.larmor_ratio:
            raise ParameterError(f"{scheme.kind} runs without Larmor field; drop omega/larmor_ratio")
        return controls
    if cfg.omega is not None:
        unit = sw.larmor_rate(p, scheme, 1.0)
        if unit == 0:
            if cfg.omega != 0:
                raise ParameterError("omega needs a nonzero coupling (eta > 0)")
            controls["larmor_ratio"] = 0.0
        else:
            controls["larmor_ratio"] = cfg.omega / unit
    elif cfg.larmor_ratio is not None:
        controls["larmor_ratio"] = cfg.larmor_ratio
    return controls


def run_point(cfg: RunConfig) -> sw.SweepTable:
    scheme = _point_scheme(cfg)
    model = sw.resolve_model(scheme, cfg.model)
    p = cfg.params
    if cfg.optimize == "none":
        controls = _point_controls(cfg, scheme)
        m = cfg.segments
        if model == "discrete" and m is None:
            _, m = mp.converged_spin_covariance(p, sw.scheme_config(p, scheme, controls),
                                                sw.SEGMENT_START, sw.SEGMENT_RTOL, sw.SEGMENT_MAX)
        result = sw.evaluate(p, scheme, controls, model, m)
        converged = True
    else:
        point = sw.optimize_point(p, scheme, model, vary_eta=cfg.optimize == "all", strict=True)
        controls, result, m, converged = point.controls, point.result, point.m_segments, point.converged
    controls = dict(controls)
    controls["larmor"] = sw.larmor_rate(p.with_(eta_tilde=controls["eta_tilde"]), scheme,
                                        controls["larmor_ratio"])
    settings = dict(kind=scheme.kind, n_passes=scheme.n_passes, model=model, m_segments=m,
                    optical_depth=p.optical_depth, zeta=p.zeta(scheme.n_passes), phi=p.beam_angle,
                    convention=p.convention, mean_jx_out=result.mean_jx_out)
    row = sw.Row(controls["eta_tilde"], controls, result.xi2, result.xi2_db, converged, result.theta_opt)
    return sw.SweepTable(cfg.command, "eta_tilde", (row.x,), [sw.Series(cfg.command, settings, [row])])


def run_figure(cfg: RunConfig) -> sw.SweepTable:
    fn = {"fig3a": sw.figure3a, "fig3b": sw.figure3b, "fig4b": sw.figure4b, "fig4c": sw.figure4c}[cfg.command]
    return fn(cfg.params, workers=cfg.workers)


def calibrate(cfg: RunConfig) -> Dict[str, object]:
    """Derived quantities of the coupling convention for one configuration."""
    p = cfg.params
    n = cfg.n_passes or 3
    c = derive_coupling(p, n)
    eps = scattering_loss(p, p.n_photons, n) if p.n_photons is not None else 0.0
    out: Dict[str, object] = dict(
        convention=p.convention, n_passes=n, eta_tilde=p.eta_tilde, eta=p.eta(n),
        optical_depth=p.optical_depth, mean_jx=p.mean_jx, kappa2=c.kappa2, kappa=c.kappa,
        chi2=c.chi2, chi=math.sqrt(c.chi2), eps=eps, r0=p.wall_reflectivity, zeta=p.zeta(n),
    )
    if n >= 3:
        omega = mp.tat_larmor_rate(n, c.kappa2)
        f = larmor_field(omega, p.pulse_duration, cfg.g_factor)
        out.update(omega_tat=omega, larmor_angular=f.larmor_angular, larmor_hz=f.larmor_hz,
                   field_tesla=f.field_tesla, field_mgauss=f.field_mgauss, g_factor=cfg.g_factor,
                   pulse_duration=p.pulse_duration)
    return out


def execute(cfg: RunConfig) -> bytes:
    """Run a configuration and return the output bytes.

    Raises:
        ConvergenceError: some optimized point did not converge.
    """
    if cfg.command == "calibrate":
        return mapping_bytes(calibrate(cfg), cfg.format)
    if cfg.command.startswith("fig"):
        table = run_figure(cfg)
        data = serialize(table, cfg.format)
        if not table.all_converged:
            err = ConvergenceError("some sweep points hit the optimizer cycle cap")
            err.data = data
            raise err
        return data
    return serialize(run_point(cfg), cfg.format)


def _write(data: bytes, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(data)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_values = read_config_file(args.config) if args.config else {}
        overrides = {k: getattr(args, k) for k in KEYS if k != "command"}
        if args.command_arg:
            overrides["command"] = args.command_arg
        cfg = parse_config(file_values, overrides)
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        data = execute(cfg)
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelViolationError as exc:
        print(f"model violation: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except ConvergenceError as exc:
        partial = getattr(exc, "data", None)
        if partial is not None:
            _write(partial, cfg.output)
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    try:
        _write(data, cfg.output)
    except OSError as exc:
        print(f"cannot write {cfg.output!r}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
