"""Deterministic low-dimensional minimization: coarse grid, then golden-section
line searches cycled over the coordinates."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f: Callable[[float], float], lo: float, hi: float,
                   xtol: float = 1e-7, max_iter: int = 200) -> Tuple[float, float]:
    """Minimize a unimodal function on ``[lo, hi]``; endpoints are candidates too.

    Returns:
        (x, f(x)) of the best point seen.
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    best = min(((c, fc), (d, fd)), key=lambda t: t[1])
    # an edge optimum sits outside the shrinking interior probes
    for x in (lo, hi):
        fx = f(x)
        if fx < best[1]:
            best = (x, fx)
    return best


@dataclass(frozen=True)
class SearchResult:
    x: np.ndarray
    fun: float
    converged: bool
    cycles: int
    n_evals: int


def coordinate_search(f: Callable[[np.ndarray], float], bounds: Sequence[Tuple[float, float]],
                      grid: Sequence[int], starts: Sequence[Sequence[float]] = (),
                      ftol: float = 1e-6, xtol: float = 1e-7, max_cycles: int = 60) -> SearchResult:
    """Grid scan, then golden section along each coordinate until a full cycle
    improves ``f`` by less than ``ftol``.

    Each line search spans one grid spacing either side of the current point
    (clipped to the bounds), so the iterate can walk across cells.

    Args:
        f: objective; may return ``inf`` for infeasible points.
        bounds: (lo, hi) per coordinate.
        grid: points per coordinate for the initial scan (>= 2, or 1 for the midpoint).
        starts: extra candidate points scored alongside the grid.
    """
    n_evals = 0

    def g(x):
        nonlocal n_evals
        n_evals += 1
        return f(np.asarray(x, dtype=float))

    axes = [np.linspace(lo, hi, n) if n > 1 else np.array([0.5 * (lo + hi)])
            for (lo, hi), n in zip(bounds, grid)]
    width = np.array([(hi - lo) / max(n - 1, 1) for (lo, hi), n in zip(bounds, grid)])
    best_x, best_f = None, math.inf
    for pt in itertools.chain(itertools.product(*axes), starts):
        val = g(pt)
        if best_x is None or val < best_f:
            best_x, best_f = np.array(pt, dtype=float), val

    x = best_x.copy()
    fx = best_f
    for cycle in range(1, max_cycles + 1):
        f_start = fx
        for i, (lo, hi) in enumerate(bounds):
            if hi <= lo:
                continue
            a, b = max(lo, x[i] - width[i]), min(hi, x[i] + width[i])

            def line(t, i=i):
                y = x.copy()
                y[i] = t
                return g(y)

            t, ft = golden_section(line, a, b, xtol)
            if ft < fx:
                x[i], fx = t, ft
        if f_start - fx < ftol and math.isfinite(fx):
            return SearchResult(x, fx, True, cycle, n_evals)
    return SearchResult(x, fx, False, max_cycles, n_evals)
