"""Compiled vs pure-Python kernel timings.

    python3 benchmarks/bench_kernels.py [--segments 20000] [--steps 100000] [--repeat 3]
"""
import argparse
import math
import time

import numpy as np

from tatsqueeze import kernels, multipass as mp
from tatsqueeze.params import PhysicalParams, derive_coupling


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def segment_args(n_segments):
    p = PhysicalParams(optical_depth=50, eta_tilde=0.26)
    c = mp.triple_pass(larmor=mp.tat_larmor_rate(3, derive_coupling(p, 3).kappa2), phi=0.05, loss=0.02)
    return (np.ascontiguousarray(0.5 * np.eye(2)), np.zeros(2),
            mp.pass_couplings(derive_coupling(p, 3).kappa, c, n_segments),
            np.array(c.pass_axes), np.array(c.rotation_angles),
            1 - c.loss_per_crossing, c.larmor / n_segments, p.eta_tilde / n_segments, n_segments)


def lyapunov_args(n_steps):
    a = math.sqrt(3) / 4 * 4.0
    return (np.array([[-0.1, a], [a, -0.1]]), np.array([[0.3, 0.05], [0.05, 0.2]]), 0.5 * np.eye(2), n_steps)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--segments", type=int, default=20000)
    ap.add_argument("--steps", type=int, default=100000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not kernels.compiled_available():
        raise SystemExit("compiled kernels not built; run `pip install -e . --no-build-isolation`")
    cases = [("run_segments", segment_args(args.segments), f"M={args.segments}"),
             ("rk4_lyapunov", lyapunov_args(args.steps), f"steps={args.steps}")]
    print(f"{'kernel':<14} {'size':<14} {'compiled [s]':>13} {'python [s]':>11} {'speedup':>8} {'max |diff|':>11}")
    for name, fargs, size in cases:
        tc, oc = best_of(lambda: getattr(kernels.get("compiled"), name)(*fargs), args.repeat)
        tp, op = best_of(lambda: getattr(kernels.get("python"), name)(*fargs), args.repeat)
        diff = float(np.abs(np.asarray(oc[0] if isinstance(oc, tuple) else oc)
                            - np.asarray(op[0] if isinstance(op, tuple) else op)).max())
        print(f"{name:<14} {size:<14} {tc:>13.4f} {tp:>11.4f} {tp / tc:>8.1f} {diff:>11.2e}")


if __name__ == "__main__":
    main()
