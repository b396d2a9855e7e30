"""Fitting the three error models to a training sample.

AR(1) and Gaussian models minimize mean CRPS; quantile regression
minimizes tick loss level by level.  The leveling horizon ``theta`` is
either fixed or profiled over a grid, keeping the smallest value that
attains the minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .ar1 import Ar1Params
from .errors import DegenerateDataError, DomainError
from .models import GaussParams, QrParams
from .optimize import minimize
from .records import as_sample

DEFAULT_THETA_GRID = tuple(5.0 + 0.5 * k for k in range(31))
DEFAULT_LEVELS = (0.1, 0.9)
RHO_MAX = 0.99
SCALE_MIN = 1e-6
NEWTON_MAX_ITER = 100
MIN_QR_SIZE = 3


@dataclass(frozen=True)
class FitConfig:
    """Estimation settings.

    ``theta_mode`` is ``"estimated"`` (profile over ``theta_grid``) or
    ``"fixed"`` (use ``theta_fixed``).
    """

    theta_mode: str = "estimated"
    theta_fixed: float = 12.0
    theta_grid: tuple = DEFAULT_THETA_GRID
    optimizer_restarts: int = 5
    tolerance: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.theta_mode not in ("estimated", "fixed"):
            raise DomainError(f"theta_mode must be 'estimated' or 'fixed', got {self.theta_mode!r}")
        grid = tuple(float(v) for v in self.theta_grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("theta_grid must be nonempty and strictly increasing")
        object.__setattr__(self, "theta_grid", grid)
        if self.optimizer_restarts < 0:
            raise DomainError("optimizer_restarts must be nonnegative")

    @classmethod
    def fixed(cls, value: float = 12.0, **kwargs) -> "FitConfig":
        return cls(theta_mode="fixed", theta_fixed=float(value), **kwargs)

    @property
    def thetas(self) -> tuple:
        return (float(self.theta_fixed),) if self.theta_mode == "fixed" else self.theta_grid


@dataclass(frozen=True)
class FitResult:
    """Outcome of one fit.

    ``theta_profile`` maps each candidate theta to its training objective
    (empty for the AR(1) model).  ``warm`` holds per-theta solutions used
    to warm-start refits on overlapping samples; it is not serialized.
    """

    kind: str
    params: object
    train_objective: float
    theta_profile: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    warm: Optional[dict] = field(default=None, repr=False, compare=False)

    @property
    def theta(self):
        return getattr(self.params, "theta", None)

    def to_dict(self) -> dict:
        p = self.params
        if isinstance(p, Ar1Params):
            params = {"rho": p.rho, "tau2": p.tau2}
        elif isinstance(p, GaussParams):
            params = {"mu": p.mu, "gamma0": p.gamma0, "gamma1": p.gamma1, "theta": p.theta}
        else:
            params = {"theta": p.theta, "levels": list(p.levels), "coeffs": [list(c) for c in p.coeffs]}
        return {
            "kind": self.kind,
            "params": params,
            "train_objective": self.train_objective,
            "theta_profile": [[t, v] for t, v in self.theta_profile.items()],
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FitResult":
        kind = data["kind"]
        p = data["params"]
        if kind == "ar1":
            params = Ar1Params(p["rho"], p["tau2"])
        elif kind == "gauss":
            params = GaussParams(p["mu"], p["gamma0"], p["gamma1"], p["theta"])
        elif kind == "qr":
            params = QrParams(p["theta"], tuple(p["levels"]), tuple(tuple(c) for c in p["coeffs"]))
        else:
            raise DomainError(f"unknown fit kind {kind!r}")
        return cls(
            kind=kind,
            params=params,
            train_objective=float(data["train_objective"]),
            theta_profile={float(t): float(v) for t, v in data.get("theta_profile", [])},
            diagnostics=dict(data.get("diagnostics", {})),
        )


def _arrays(sample):
    s = as_sample(sample)
    if len(s) == 0:
        raise DomainError("training sample is empty")
    return s.horizon, s.error


def _check_scale(errors, kind):
    if not np.any(errors != 0.0):
        raise DegenerateDataError(f"{kind}: all training errors are zero; the scale is not identified")


def _halfgrid_indices(h):
    doubled = np.round(2.0 * h)
    if np.any(doubled != 2.0 * h) or np.any(h < 0):
        raise DomainError("horizons must be nonnegative multiples of 0.5")
    lo = np.ascontiguousarray(np.floor(h), dtype=np.intp)
    hi = np.ascontiguousarray(np.ceil(h), dtype=np.intp)
    return lo, hi, int(hi.max())


def _ar1_start_tau(rho, h, y, hmax):
    """Scale matched to the mean squared error at short horizons."""
    unit = kernels.ar1_sigma_table(rho, 1.0, max(hmax, 1))
    short = h <= max(3.0, float(h.min()))
    s = 0.5 * (unit[np.floor(h[short]).astype(np.intp)] + unit[np.ceil(h[short]).astype(np.intp)])
    denom = float(np.mean(s * s))
    if denom <= 0.0:
        return max(float(np.sqrt(np.mean(y * y))), SCALE_MIN)
    return max(math.sqrt(float(np.mean(y[short] ** 2)) / denom), SCALE_MIN)


def fit_ar1(sample, config: FitConfig = FitConfig(), warm: Optional[FitResult] = None) -> FitResult:
    """Minimum-CRPS fit of the zero-mean AR(1) model.

    Searches ``rho`` in ``[0, 0.99]`` and ``tau >= 1e-6`` from three
    ``rho`` starts with moment-matched ``tau``, plus perturbed restarts.
    A ``warm`` fit adds its solution as a start and skips the grid starts.
    """
    h, y = _arrays(sample)
    _check_scale(y, "ar1")
    lo, hi, hmax = _halfgrid_indices(h)
    hmax = max(hmax, 1)
    y = np.ascontiguousarray(y, dtype=float)

    def objective(v):
        return kernels.ar1_crps_mean(v[0], v[1], lo, hi, y, hmax)

    if warm is not None:
        p = warm.params
        starts = [np.array([p.rho, p.tau])]
        restarts = min(1, config.optimizer_restarts)
    else:
        starts = [np.array([r, _ar1_start_tau(r, h, y, hmax)]) for r in (0.1, 0.5, 0.9)]
        restarts = config.optimizer_restarts
    res = minimize(objective, starts[0], [(0.0, RHO_MAX), (SCALE_MIN, None)],
                   restarts=restarts, tol=config.tolerance, seed=config.seed,
                   extra_starts=starts[1:])
    rho, tau = float(res.x[0]), float(res.x[1])
    diagnostics = {
        "nfev": res.nfev,
        "starts": res.starts,
        "start_objectives": list(res.start_values),
        "rho_identified": bool(h.max() > 1.0),
    }
    return FitResult("ar1", Ar1Params(rho, tau * tau), float(res.fun), {}, diagnostics)


def _gauss_start(x, y):
    mu = float(np.mean(y))
    target = np.abs(y - mu) * math.sqrt(math.pi / 2.0)
    if np.ptp(x) > 0:
        g1, g0 = np.polyfit(x, target, 1)
    else:
        g0, g1 = float(np.mean(target)), 0.0
    g1 = max(float(g1), 0.0)
    g0 = max(float(g0), 0.1 * float(np.mean(target)), SCALE_MIN)
    return mu, g0, g1


def fit_gauss(sample, config: FitConfig = FitConfig(), warm: Optional[FitResult] = None) -> FitResult:
    """Minimum-CRPS fit of the Gaussian model for each candidate theta.

    The mean CRPS is convex in ``(mu, gamma0, gamma1)``, so each theta is
    solved by a bound-projected Newton iteration on analytic derivatives.
    Thetas at or beyond the largest horizon give the same regressor and
    share one solve.
    """
    h, y = _arrays(sample)
    _check_scale(y, "gauss")
    y = np.ascontiguousarray(y, dtype=float)
    warm_params = (warm.warm or {}) if warm is not None else {}
    profile, solutions, iters = {}, {}, {}
    cache = {}
    for theta in config.thetas:
        x = np.ascontiguousarray(np.minimum(h, theta))
        key = x.tobytes()
        if key in cache:
            sol, it = cache[key]
        else:
            start = warm_params.get(theta) or _gauss_start(x, y)
            mu, g0, g1, f, it = kernels.gauss_crps_newton(
                x, y, start[0], start[1], start[2], SCALE_MIN, config.tolerance * 1e-4, NEWTON_MAX_ITER)
            sol = (mu, g0, g1, f)
            cache[key] = (sol, it)
        solutions[theta] = sol
        profile[theta] = sol[3]
        iters[theta] = it
    best = min(profile, key=lambda t: (profile[t], t))
    mu, g0, g1, f = solutions[best]
    diagnostics = {"newton_iterations": sum(iters.values()), "distinct_solves": len(cache)}
    return FitResult(
        "gauss", GaussParams(mu, g0, g1, best), float(f), profile, diagnostics,
        warm={t: s[:3] for t, s in solutions.items()},
    )


def fit_qr(sample, config: FitConfig = FitConfig(), levels=DEFAULT_LEVELS,
           warm: Optional[FitResult] = None) -> FitResult:
    """Exact tick-loss fit of ``beta0 + beta1 * min(h, theta)`` per level.

    Each level is solved exactly by descending over lines through pairs
    of observations.  Theta minimizes the summed mean tick loss over the
    levels.  With a single distinct regressor value the slope is not
    identified: ``beta1 = 0`` and the intercept is the empirical quantile.
    """
    h, y = _arrays(sample)
    if len(y) < MIN_QR_SIZE:
        raise DomainError(f"quantile regression needs at least {MIN_QR_SIZE} cases, got {len(y)}")
    levels = tuple(float(a) for a in levels)
    y = np.ascontiguousarray(y, dtype=float)
    warm_params = (warm.warm or {}) if warm is not None else {}
    profile, solutions = {}, {}
    cache = {}
    degenerate = False
    for theta in config.thetas:
        x = np.ascontiguousarray(np.minimum(h, theta))
        key = x.tobytes()
        if key not in cache:
            prior = warm_params.get(theta)
            coeffs, total = [], 0.0
            for k, alpha in enumerate(levels):
                if prior is not None:
                    b0, b1, loss, _, deg = kernels.quantile_line(x, y, alpha, prior[k][0], prior[k][1], True)
                else:
                    b0, b1, loss, _, deg = kernels.quantile_line(x, y, alpha)
                degenerate = degenerate or deg
                coeffs.append((b0, b1))
                total += loss
            cache[key] = (tuple(coeffs), total)
        solutions[theta], profile[theta] = cache[key]
    best = min(profile, key=lambda t: (profile[t], t))
    diagnostics = {"slope_identified": not degenerate, "distinct_solves": len(cache)}
    return FitResult(
        "qr", QrParams(best, levels, solutions[best]), float(profile[best]), profile, diagnostics,
        warm=dict(solutions),
    )
