"""Box-constrained derivative-free minimization with restarts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError, OptimizationError


@dataclass(frozen=True)
class MinimizeResult:
    x: np.ndarray
    fun: float
    nfev: int
    starts: int
    start_values: tuple = field(default=())


def _bounds_arrays(bounds, d):
    if bounds is None:
        return np.full(d, -np.inf), np.full(d, np.inf)
    if len(bounds) != d:
        raise DomainError(f"need {d} bound pairs, got {len(bounds)}")
    lb = np.array([-np.inf if b[0] is None else b[0] for b in bounds], dtype=float)
    ub = np.array([np.inf if b[1] is None else b[1] for b in bounds], dtype=float)
    if np.any(lb > ub):
        raise DomainError("lower bounds must not exceed upper bounds")
    return lb, ub


def _initial_step(x, lb, ub):
    step = np.where(np.abs(x) > 1e-8, 0.1 * np.abs(x), 0.05)
    width = ub - lb
    return np.where(np.isfinite(width), np.minimum(step, 0.25 * width), step)


def minimize(fun, x0, bounds=None, *, restarts=5, tol=1e-8, xtol=1e-6, seed=0,
             extra_starts=(), maxfev=4000):
    """Nelder-Mead simplex search over a box, with multi-start.

    Runs from ``x0`` and every entry of ``extra_starts``, then ``restarts``
    times from random perturbations of the incumbent.  Points are clipped
    to the box.  The best point found is returned, so the value is never
    worse than at any start.

    Parameters
    ----------
    fun : callable
        Objective of a 1-d float array.  Non-finite values count as +inf.
    x0 : array_like
        First start point.
    bounds : sequence of (low, high), optional
        ``None`` entries mean unbounded.
    restarts : int
        Number of perturbed restarts after the designated starts.
    tol, xtol : float
        Simplex convergence thresholds on objective spread and vertex spread.
    seed : int or sequence of int
        Seeds the perturbations.

    Raises
    ------
    OptimizationError
        If the objective is non-finite at every start.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    d = len(x0)
    lb, ub = _bounds_arrays(bounds, d)
    rng = np.random.default_rng(seed)
    starts = [x0] + [np.atleast_1d(np.asarray(s, dtype=float)) for s in extra_starts]
    best_x, best_f = None, math.inf
    nfev = 0
    start_values = []

    def run(start):
        nonlocal best_x, best_f, nfev
        start = np.clip(start, lb, ub)
        x, f, n, _ = kernels.nelder_mead(fun, start, lb, ub, _initial_step(start, lb, ub),
                                         tol, xtol, maxfev)
        nfev += n
        start_values.append(float(f))
        if f < best_f:
            best_x, best_f = np.asarray(x, dtype=float), float(f)

    for s in starts:
        run(s)
    for _ in range(restarts):
        base = x0 if best_x is None else best_x
        scale = np.where(np.abs(base) > 1e-8, 0.3 * np.abs(base), 0.1)
        run(base + scale * rng.standard_normal(d))
    if best_x is None or not math.isfinite(best_f):
        raise OptimizationError("objective is non-finite at every start point")
    return MinimizeResult(x=best_x, fun=best_f, nfev=nfev, starts=len(start_values),
                          start_values=tuple(start_values))
