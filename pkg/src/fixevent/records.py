"""Core data records: forecast errors and raw forecast archives."""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DataError, DomainError


@dataclass(frozen=True)
class ErrorObservation:
    """One forecast case.

    ``error`` is realization minus point forecast, in growth-rate
    percentage points.  ``horizon`` is the number of months between the
    forecast and the end of the target year.
    """

    case_id: str
    target_year: int
    horizon: float
    error: float
    point_forecast: Optional[float] = None
    realization: Optional[float] = None

    def __post_init__(self):
        if not (self.horizon >= 0):
            raise DomainError(f"case {self.case_id}: negative horizon {self.horizon}")
        if self.point_forecast is not None and self.realization is not None:
            implied = self.realization - self.point_forecast
            if not math.isclose(implied, self.error, rel_tol=1e-9, abs_tol=1e-9):
                raise DataError(
                    f"case {self.case_id}: error {self.error} != realization - forecast ({implied})"
                )


@dataclass(frozen=True)
class RawForecastRecord:
    institution: str
    forecast_date: dt.date
    target_year: int
    point_forecast: float


@dataclass(frozen=True)
class BenchmarkInterval:
    """Externally supplied interval for a case, on the realization scale."""

    case_id: str
    lower: float
    upper: float
    source: str = ""

    def __post_init__(self):
        if self.lower > self.upper:
            raise DomainError(f"benchmark {self.case_id}: lower {self.lower} > upper {self.upper}")


def _opt_array(values):
    return np.array([np.nan if v is None else v for v in values], dtype=float)


@dataclass(frozen=True, eq=False)
class ErrorSample:
    """Column-oriented view of a sequence of :class:`ErrorObservation`.

    Fitting and cross-validation work on arrays; this is the container they
    pass around.  Missing forecasts/realizations are stored as NaN.
    """

    case_id: np.ndarray
    target_year: np.ndarray
    horizon: np.ndarray
    error: np.ndarray
    point_forecast: np.ndarray = field(default=None)
    realization: np.ndarray = field(default=None)

    def __post_init__(self):
        n = len(self.error)
        fill = np.full(n, np.nan)
        object.__setattr__(self, "case_id", np.asarray(self.case_id, dtype=object))
        object.__setattr__(self, "target_year", np.asarray(self.target_year, dtype=np.int64))
        object.__setattr__(self, "horizon", np.asarray(self.horizon, dtype=float))
        object.__setattr__(self, "error", np.asarray(self.error, dtype=float))
        for name in ("point_forecast", "realization"):
            value = getattr(self, name)
            object.__setattr__(self, name, fill.copy() if value is None else np.asarray(value, dtype=float))
        for name in ("case_id", "target_year", "horizon", "point_forecast", "realization"):
            if len(getattr(self, name)) != n:
                raise DataError(f"column {name} has length {len(getattr(self, name))}, expected {n}")

    def __len__(self):
        return len(self.error)

    @classmethod
    def from_observations(cls, observations: Iterable[ErrorObservation]) -> "ErrorSample":
        obs = list(observations)
        return cls(
            case_id=[o.case_id for o in obs],
            target_year=[o.target_year for o in obs],
            horizon=[o.horizon for o in obs],
            error=[o.error for o in obs],
            point_forecast=_opt_array(o.point_forecast for o in obs),
            realization=_opt_array(o.realization for o in obs),
        )

    def observations(self) -> list[ErrorObservation]:
        def opt(v):
            return None if np.isnan(v) else float(v)

        return [
            ErrorObservation(
                case_id=str(self.case_id[i]),
                target_year=int(self.target_year[i]),
                horizon=float(self.horizon[i]),
                error=float(self.error[i]),
                point_forecast=opt(self.point_forecast[i]),
                realization=opt(self.realization[i]),
            )
            for i in range(len(self))
        ]

    def subset(self, mask) -> "ErrorSample":
        return ErrorSample(
            case_id=self.case_id[mask],
            target_year=self.target_year[mask],
            horizon=self.horizon[mask],
            error=self.error[mask],
            point_forecast=self.point_forecast[mask],
            realization=self.realization[mask],
        )

    def with_horizon(self, horizon) -> "ErrorSample":
        return ErrorSample(
            case_id=self.case_id,
            target_year=self.target_year,
            horizon=horizon,
            error=self.error,
            point_forecast=self.point_forecast,
            realization=self.realization,
        )

    @property
    def years(self) -> list[int]:
        return sorted(int(y) for y in np.unique(self.target_year))


def as_sample(data: ErrorSample | Sequence[ErrorObservation]) -> ErrorSample:
    if isinstance(data, ErrorSample):
        return data
    return ErrorSample.from_observations(data)
