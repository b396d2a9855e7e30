"""Latent monthly AR(1) process behind annual fixed-event forecasts.

Annual growth ``Y_t`` is the sum of twelve monthly values following
``Y_m = rho * Y_{m-1} + eps_m`` with ``eps_m ~ N(0, tau2)``.  A forecast
made ``h`` months before the end of year ``t`` knows the path up to month
``12 t - h``; its optimal-forecast error is a fixed linear combination of
the unknown shocks.

Months are indexed forward from 0 on simulated paths.  Year ``t``
(1-based) occupies months ``lead + 12 (t - 1)`` to ``lead + 12 t - 1``,
where ``lead`` months precede the first target year so that 24-month
horizons for year 1 are covered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError
from .records import ErrorObservation, ErrorSample

LEAD_MONTHS = 24
MAX_COV_HORIZON = 24


@dataclass(frozen=True)
class Ar1Params:
    rho: float
    tau2: float

    def __post_init__(self):
        if not (0.0 <= self.rho < 1.0):
            raise DomainError(f"rho must lie in [0, 1), got {self.rho}")
        if not (self.tau2 > 0.0):
            raise DomainError(f"tau2 must be positive, got {self.tau2}")

    @property
    def tau(self) -> float:
        return math.sqrt(self.tau2)


@dataclass(frozen=True)
class ErrorSampleDesign:
    n: int
    t_max: int
    horizon_set: tuple = tuple(range(1, 25))
    seed: int | Sequence[int] = 0

    def __post_init__(self):
        if self.n < 1 or self.t_max < 1:
            raise DomainError(f"need n >= 1 and t_max >= 1, got n={self.n}, t_max={self.t_max}")
        hs = tuple(int(h) for h in self.horizon_set)
        if not hs or any(h != float(g) for h, g in zip(hs, self.horizon_set)):
            raise DomainError("horizon_set must be a nonempty set of integers")
        if min(hs) < 1 or max(hs) > LEAD_MONTHS:
            raise DomainError(f"horizons must lie in [1, {LEAD_MONTHS}]")
        object.__setattr__(self, "horizon_set", hs)


@dataclass(frozen=True, eq=False)
class MonthlyPath:
    """Simulated monthly shocks and growth rates (forward time order)."""

    shocks: np.ndarray
    values: np.ndarray

    def __len__(self):
        return len(self.values)


def accumulation_matrix(rho: float, L: int) -> np.ndarray:
    """Lower-triangular ``L x L`` matrix with ``A[r, c] = rho**(r - c)`` for ``r >= c``.

    Row ``r`` maps the next ``L`` shocks to the error of the ``r``-step
    forecast of the monthly value.
    """
    if L < 1:
        raise DimensionError(f"L must be at least 1, got {L}")
    r = np.arange(L)
    diff = r[:, None] - r[None, :]
    return np.where(diff >= 0, float(rho) ** np.maximum(diff, 0), 0.0)


def _check_integer_horizon(h) -> int:
    if h != int(h):
        raise DomainError(f"horizon must be an integer number of months, got {h}")
    h = int(h)
    if h < 0:
        raise DomainError(f"horizon must be nonnegative, got {h}")
    return h


def sigma_h(params: Ar1Params, h: int) -> float:
    """Forecast-error standard deviation of annual growth at horizon ``h``.

    Computed literally as ``sqrt(tau2 * w' A A' w)``: the error of the sum
    of the last twelve (or all ``h`` if ``h < 12``) monthly forecast errors.
    ``sigma_h(params, 0)`` is 0: the year is fully observed.
    """
    h = _check_integer_horizon(h)
    if h == 0:
        return 0.0
    A = accumulation_matrix(params.rho, h)
    w = np.zeros(h)
    w[max(0, h - 12):] = 1.0
    v = A.T @ w
    return math.sqrt(params.tau2 * float(v @ v))


def kappa_coefficients(rho: float, length: int) -> np.ndarray:
    """Loadings of an annual-growth error on shocks, in reverse time.

    Entry ``j`` is the weight of the shock ``j`` months before the end of
    the target year: the sum of ``rho**k`` over those of its lags ``k``
    that land inside the year.
    """
    j = np.arange(length)
    partial = np.cumsum(float(rho) ** np.arange(12))
    return np.where(j < 12, partial[np.minimum(j, 11)], float(rho) ** np.maximum(j - 11, 0) * partial[11])


def sigma_table(params: Ar1Params, h_max: int) -> np.ndarray:
    """``sigma_h`` for ``h = 0, ..., h_max`` in one pass."""
    c = kappa_coefficients(params.rho, h_max)
    return np.concatenate(([0.0], np.sqrt(params.tau2 * np.cumsum(c * c))))


def sigma_h_halfgrid(params: Ar1Params, h):
    """``sigma_h`` extended to half-month horizons.

    Non-integer horizons get the average of the two neighbouring integer
    horizons.  Accepts scalars or arrays.
    """
    harr = np.asarray(h, dtype=float)
    if np.any(harr < 0) or np.any(np.isnan(harr)):
        raise DomainError("horizons must be nonnegative")
    if np.any(harr * 2 != np.round(harr * 2)):
        raise DomainError("horizons must be multiples of 0.5")
    lo = np.floor(harr).astype(np.intp)
    hi = np.ceil(harr).astype(np.intp)
    table = sigma_table(params, int(hi.max()) if hi.size else 0)
    out = 0.5 * (table[lo] + table[hi])
    return float(out) if np.ndim(h) == 0 else out


def kappa_vector(rho: float, t: int, h: int, t_max: int, M: int) -> np.ndarray:
    """Row vector mapping the reverse-time shock path to ``e_{t,h}``.

    The first ``12 (t_max - t)`` entries (months after year ``t``) are
    zero, followed by ``h`` loadings from :func:`kappa_coefficients` and
    zero padding up to length ``M``.
    """
    h = _check_integer_horizon(h)
    if not 1 <= h <= MAX_COV_HORIZON:
        raise DomainError(f"horizon must lie in [1, {MAX_COV_HORIZON}], got {h}")
    if t > t_max:
        raise DomainError(f"target year {t} is after t_max={t_max}")
    offset = 12 * (t_max - t)
    if M < offset + h:
        raise DimensionError(f"M={M} too small to place horizon {h} for year {t} (needs {offset + h})")
    k = np.zeros(M)
    k[offset:offset + h] = kappa_coefficients(rho, h)
    return k


def analytic_error_covariance(rho: float, tau2: float, t1: int, h1: int, t2: int, h2: int) -> float:
    """Covariance of optimal-forecast errors ``e_{t1,h1}`` and ``e_{t2,h2}``.

    Same year: ``tau2 * sum_{j < min(h1, h2)} c_j**2``.  Adjacent years:
    ``tau2 * sum_{j < min(h1, h2 - 12)} c_j c_{j+12}``.  Zero once
    ``12 (t2 - t1) >= h2``: the later forecast already knows every shock
    behind the earlier error.
    """
    h1 = _check_integer_horizon(h1)
    h2 = _check_integer_horizon(h2)
    for h in (h1, h2):
        if not 1 <= h <= MAX_COV_HORIZON:
            raise DomainError(f"horizons must lie in [1, {MAX_COV_HORIZON}], got {h}")
    if t2 < t1:
        raise DomainError(f"need t2 >= t1, got t1={t1}, t2={t2}")
    lag = 12 * (t2 - t1)
    if lag >= h2:
        return 0.0
    m = min(h1, h2 - lag)
    c = kappa_coefficients(rho, m + lag)
    return float(tau2 * np.dot(c[:m], c[lag:lag + m]))


def simulate_paths(params: Ar1Params, months: int, rng: np.random.Generator, n_paths=None):
    """Draw monthly shocks and values; ``values[..., 0]`` is stationary.

    Returns ``(shocks, values)`` with trailing axis of length ``months``;
    a leading axis of length ``n_paths`` is added when it is given.
    """
    shape = (months,) if n_paths is None else (n_paths, months)
    shocks = rng.standard_normal(shape) * params.tau
    values = np.empty_like(shocks)
    values[..., 0] = shocks[..., 0] / math.sqrt(1.0 - params.rho ** 2)
    for m in range(1, months):
        values[..., m] = params.rho * values[..., m - 1] + shocks[..., m]
    return shocks, values


def simulate_path(params: Ar1Params, months: int, rng: np.random.Generator) -> MonthlyPath:
    shocks, values = simulate_paths(params, months, rng)
    return MonthlyPath(shocks=shocks, values=values)


def year_end_index(t, lead: int = LEAD_MONTHS):
    """Forward month index of the last month of (1-based) year ``t``."""
    return lead + 12 * np.asarray(t) - 1


def direct_forecast_errors(values: np.ndarray, rho: float, t: int, h: int, lead: int = LEAD_MONTHS):
    """Errors of the conditional-mean forecast computed from the path itself.

    Independent of the loading representation: the forecast sums the
    observed months of year ``t`` and the ``rho``-decayed projection of the
    last observed month for the rest.  ``values`` may carry leading path
    axes.
    """
    end = int(year_end_index(t, lead))
    start = end - 11
    known = end - h
    if known < 0:
        raise DimensionError(f"path too short for year {t} at horizon {h}")
    actual = values[..., start:end + 1].sum(axis=-1)
    forecast = np.zeros(values.shape[:-1])
    for m in range(start, end + 1):
        if m <= known:
            forecast = forecast + values[..., m]
        else:
            forecast = forecast + rho ** (m - known) * values[..., known]
    return actual - forecast


def simulate_sample(params: Ar1Params, design: ErrorSampleDesign) -> ErrorSample:
    """Simulate one path and a sample of ``design.n`` optimal-forecast errors.

    Target years and horizons are drawn uniformly; each error is the
    loading vector applied to the path's shocks, so within-year and
    adjacent-year dependence comes out of the path.
    """
    rng = np.random.default_rng(design.seed)
    months = 12 * design.t_max + LEAD_MONTHS
    shocks, values = simulate_paths(params, months, rng)
    t = rng.integers(1, design.t_max + 1, size=design.n)
    h = np.asarray(design.horizon_set)[rng.integers(0, len(design.horizon_set), size=design.n)]
    hmax = int(h.max())
    c = kappa_coefficients(params.rho, hmax)
    lags = np.arange(hmax)
    idx = year_end_index(t)[:, None] - lags[None, :]
    weights = np.where(lags[None, :] < h[:, None], c[None, :], 0.0)
    errors = np.sum(weights * shocks[idx], axis=1)
    realized = values[year_end_index(t)[:, None] - np.arange(12)[None, :]].sum(axis=1)
    return ErrorSample(
        case_id=[f"sim{i:05d}" for i in range(design.n)],
        target_year=t,
        horizon=h.astype(float),
        error=errors,
        point_forecast=realized - errors,
        realization=realized,
    )


def simulate_errors(params: Ar1Params, design: ErrorSampleDesign) -> list[ErrorObservation]:
    return simulate_sample(params, design).observations()
