"""Derivative-free minimisers used by every bound family.

Objectives may return ``inf`` at infeasible points (divergent per-letter
integrals, empty regions); the coarse grids step around those.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import NumericalError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, lo: float, hi: float, tol: float = 1e-6, max_iter: int = 200):
    """Minimise f on [lo, hi] assuming unimodality; returns (x, f(x))."""
    a, b = float(lo), float(hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)) / 2:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def grid_golden(f, lo: float, hi: float, n_grid: int = 64, tol: float = 1e-6, grid=None, coarse=None):
    """Coarse grid to bracket the minimum, then golden-section inside the bracket.

    ``coarse`` is an optional cheaper surrogate used only on the grid. Returns
    (x, f(x)) for the best point seen.
    """
    xs = np.linspace(lo, hi, n_grid) if grid is None else np.asarray(grid, dtype=float)
    fs = np.array([(coarse or f)(x) for x in xs])
    if not np.any(np.isfinite(fs)):
        return float(xs[0]), math.inf
    i = int(np.argmin(np.where(np.isfinite(fs), fs, np.inf)))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, len(xs) - 1)]
    x, fx = golden_section(f, a, b, tol=tol)
    f_grid = fs[i] if coarse is None else f(xs[i])
    if f_grid <= fx:
        return float(xs[i]), float(f_grid)
    return float(x), float(fx)


@dataclass
class OptimResult:
    x: np.ndarray
    value: float
    starts: list = field(default_factory=list)
    evaluations: int = 0


def coordinate_descent(f, x0, bounds, n_grid: int = 12, sweeps: int = 8, tol: float = 1e-7):
    """Cyclic coordinate descent; each line search is grid + golden over the box side."""
    x = np.array(x0, dtype=float)
    fx = f(x)
    for _ in range(sweeps):
        before = fx
        for i, (lo, hi) in enumerate(bounds):
            if lo == hi:
                continue

            def line(t, i=i):
                y = x.copy()
                y[i] = t
                return f(y)

            grid = np.unique(np.concatenate([np.linspace(lo, hi, n_grid), [x[i]]]))
            t, ft = grid_golden(line, lo, hi, grid=grid, tol=tol)
            if ft < fx:
                x[i] = t
                fx = ft
        if not math.isfinite(before) and not math.isfinite(fx):
            break
        if math.isfinite(before) and before - fx <= tol * max(1.0, abs(before)):
            break
    return x, fx


def polish(f, x0, bounds, fx0=None, max_evals: int = 2000):
    """Nelder-Mead refinement inside the box; catches descent directions that mix coordinates."""
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    free = lo < hi
    if not np.any(free):
        return np.array(x0, dtype=float), f(x0) if fx0 is None else fx0
    base = np.array(x0, dtype=float)

    def g(y):
        x = base.copy()
        x[free] = y
        if np.any(x < lo) or np.any(x > hi):
            return math.inf
        return f(x)

    res = optimize.minimize(g, base[free], method="Nelder-Mead",
                            options={"maxfev": max_evals, "xatol": 1e-9, "fatol": 1e-12})
    fx0 = f(base) if fx0 is None else fx0
    if np.isfinite(res.fun) and res.fun < fx0:
        base[free] = res.x
        return base, float(res.fun)
    return base, fx0


def multistart(f, bounds, starts: int = 5, seed: int = 0, initial=(), refine: bool = True,
               **kwargs) -> OptimResult:
    """Coordinate descent from the given initial points plus seeded random starts.

    With ``refine`` set, a Nelder-Mead pass runs before and after each descent
    so that descent directions mixing several coordinates are not missed.
    Deterministic for a fixed seed. Raises NumericalError if every start ends
    at a non-finite objective.
    """
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    points = [np.clip(np.array(p, dtype=float), lo, hi) for p in initial]
    while len(points) < max(starts, len(initial)):
        points.append(lo + rng.random(len(bounds)) * (hi - lo))
    calls = [0]

    def counted(x):
        calls[0] += 1
        return f(x)

    best = None
    trail = []
    for p in points:
        x, fx = p, counted(p)
        if refine and math.isfinite(fx):
            x, fx = polish(counted, x, bounds, fx)
        x, fx = coordinate_descent(counted, x, bounds, **kwargs)
        if refine and math.isfinite(fx):
            x, fx = polish(counted, x, bounds, fx)
        trail.append((x.tolist(), fx))
        if math.isfinite(fx) and (best is None or fx < best[1]):
            best = (x, fx)
    if best is None:
        raise NumericalError("optimizer: every start diverged")
    return OptimResult(best[0], float(best[1]), trail, calls[0])
