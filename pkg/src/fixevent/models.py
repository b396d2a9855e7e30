"""Forecast-error distribution models and the losses used to fit and score them.

Three models map a horizon ``h`` (months) to error quantiles:

* AR(1): ``z_alpha * sigma_h(h; rho, tau2)``, zero mean.
* Gaussian: ``mu + z_alpha * (gamma0 + gamma1 * min(h, theta))``.
* Quantile regression: ``beta0_alpha + beta1_alpha * min(h, theta)``,
  separate coefficients per level.

The parameter dataclasses double as the model objects: ``quantile`` and
``central_interval`` dispatch on their type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .ar1 import Ar1Params, sigma_h_halfgrid
from .errors import DomainError, InvalidParameterError, MissingCoefficientError

LEVEL_MATCH_TOL = 1e-9
THETA_RANGE = (5.0, 20.0)


def _check_theta(theta):
    if not THETA_RANGE[0] <= theta <= THETA_RANGE[1]:
        raise InvalidParameterError(f"theta must lie in [5, 20], got {theta}")


def _check_alpha(alpha):
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"quantile level must lie in (0, 1), got {alpha}")


def normal_quantile(alpha: float) -> float:
    """Standard normal quantile, antisymmetric about 0.5 for decimal levels.

    The lower tail level ``min(alpha, 1 - alpha)`` is rounded to 12
    decimals, so ``normal_quantile(1 - a) == -normal_quantile(a)`` holds
    exactly for decimal levels despite ``1 - 0.9 != 0.1`` in floating point.
    """
    _check_alpha(alpha)
    tail = min(alpha, 1.0 - alpha)
    tail = round(tail, 12) or tail
    z = float(ndtri(tail))
    return -z if alpha > 0.5 else z


@dataclass(frozen=True)
class GaussParams:
    mu: float
    gamma0: float
    gamma1: float
    theta: float

    def __post_init__(self):
        _check_theta(self.theta)

    def sigma(self, h):
        return self.gamma0 + self.gamma1 * np.minimum(h, self.theta)


@dataclass(frozen=True)
class QrParams:
    theta: float
    levels: tuple
    coeffs: tuple

    def __post_init__(self):
        _check_theta(self.theta)
        levels = tuple(float(a) for a in self.levels)
        coeffs = tuple((float(b0), float(b1)) for b0, b1 in self.coeffs)
        if len(levels) != len(coeffs):
            raise DomainError("one (beta0, beta1) pair is needed per quantile level")
        if any(not 0.0 < a < 1.0 for a in levels) or any(b <= a for a, b in zip(levels, levels[1:])):
            raise DomainError(f"levels must be strictly increasing in (0, 1), got {levels}")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "coeffs", coeffs)

    def coefficients(self, alpha: float) -> tuple[float, float]:
        for a, c in zip(self.levels, self.coeffs):
            if abs(a - alpha) <= LEVEL_MATCH_TOL:
                return c
        raise MissingCoefficientError(f"no coefficients for level {alpha}; fitted levels {self.levels}")


@dataclass(frozen=True)
class IntervalForecast:
    lower: float
    upper: float
    nominal_level: float
    crossed: bool = False

    def __post_init__(self):
        if self.lower > self.upper:
            raise DomainError(f"interval lower {self.lower} > upper {self.upper}")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def shifted(self, offset: float) -> "IntervalForecast":
        return IntervalForecast(self.lower + offset, self.upper + offset, self.nominal_level, self.crossed)


def _scalar_or_array(value, like):
    return float(value) if np.ndim(like) == 0 else value


def ar1_quantile(params: Ar1Params, h, alpha: float):
    z = normal_quantile(alpha)
    return _scalar_or_array(z * np.asarray(sigma_h_halfgrid(params, h)), h)


def gauss_quantile(params: GaussParams, h, alpha: float):
    z = normal_quantile(alpha)
    sigma = params.sigma(np.asarray(h, dtype=float))
    if np.any(~(sigma > 0)):
        raise InvalidParameterError(
            f"gamma0 + gamma1 * min(h, theta) must be positive; got {np.min(sigma)}"
        )
    return _scalar_or_array(params.mu + z * sigma, h)


def qr_quantile(params: QrParams, h, alpha: float):
    b0, b1 = params.coefficients(alpha)
    return _scalar_or_array(b0 + b1 * np.minimum(np.asarray(h, dtype=float), params.theta), h)


def quantile(model, h, alpha: float):
    """Error quantile at level ``alpha`` and horizon(s) ``h`` for any model."""
    if isinstance(model, Ar1Params):
        return ar1_quantile(model, h, alpha)
    if isinstance(model, GaussParams):
        return gauss_quantile(model, h, alpha)
    if isinstance(model, QrParams):
        return qr_quantile(model, h, alpha)
    raise TypeError(f"unsupported model type {type(model).__name__}")


def interval_levels(nominal_level: float) -> tuple[float, float]:
    """Quantile levels bounding the central interval, e.g. 0.8 -> (0.1, 0.9)."""
    if not 0.0 < nominal_level < 1.0:
        raise DomainError(f"nominal level must lie in (0, 1), got {nominal_level}")
    return round((1.0 - nominal_level) / 2.0, 12), round((1.0 + nominal_level) / 2.0, 12)


def interval_bounds(model, h, nominal_level: float):
    """Vectorized central interval: ``(lower, upper, crossed)`` arrays.

    Crossed quantiles (possible for independently fitted QR levels) are
    swapped; ``crossed`` flags the affected entries.
    """
    a_lo, a_hi = interval_levels(nominal_level)
    h = np.atleast_1d(np.asarray(h, dtype=float))
    lo = np.asarray(quantile(model, h, a_lo), dtype=float)
    hi = np.asarray(quantile(model, h, a_hi), dtype=float)
    crossed = lo > hi
    return np.minimum(lo, hi), np.maximum(lo, hi), crossed


def central_interval(model, h: float, nominal_level: float) -> IntervalForecast:
    lo, hi, crossed = interval_bounds(model, h, nominal_level)
    return IntervalForecast(float(lo[0]), float(hi[0]), nominal_level, bool(crossed[0]))


def crps_gaussian(mu, sigma, y):
    """CRPS of N(mu, sigma^2) at outcome ``y`` (closed form, vectorized).

    ``sigma == 0`` is the point-mass limit ``|y - mu|``.
    """
    mu, sigma, y = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (mu, sigma, y)))
    if np.any(sigma < 0):
        raise DomainError("sigma must be nonnegative")
    pos = sigma > 0
    safe = np.where(pos, sigma, 1.0)
    z = (y - mu) / safe
    pdf = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    val = safe * (z * (2.0 * ndtr(z) - 1.0) + 2.0 * pdf - 1.0 / math.sqrt(math.pi))
    out = np.where(pos, val, np.abs(y - mu))
    return float(out) if out.ndim == 0 else out


def tick_loss(alpha, q, y):
    """Pinball loss ``(y - q) * (alpha - 1{y < q})``."""
    u = np.asarray(y, dtype=float) - np.asarray(q, dtype=float)
    out = u * (alpha - (u < 0))
    return float(out) if np.ndim(out) == 0 else out
