"""Synthetic forecast archives shaped like the German and US data sets.

Both archives come from one simulated monthly AR(1) path per data set.
Each forecast is the conditional mean given the months observed before
its (rounded-up) horizon, plus a small institution-specific noise, and is
rounded to one decimal like published forecasts.  The files bundled in
``fixevent/data`` are the output of :func:`write_bundled` with default
seeds.
"""

from __future__ import annotations

import datetime as dt
import math
from pathlib import Path

import numpy as np

from .ar1 import Ar1Params, simulate_paths
from .dataio import build_dataset, code_horizon, write_benchmark, write_forecasts, write_outcomes
from .records import BenchmarkInterval, RawForecastRecord

LEAD = 36
MEAN_GROWTH = 1.4
GERMAN_YEARS = range(2002, 2022)
US_YEARS = range(1982, 2022)
GERMAN_PARAMS = Ar1Params(0.6, 0.12)
US_PARAMS = Ar1Params(0.5, 0.1)
# survey rounds dropped from the US archive, as (year, quarter)
US_DROPPED_ROUNDS = ((1985, 1), (1986, 1), (1990, 1))
US_FIRST_ROUND = (1981, 3)

# (institution, month, nominal day, years ahead covered)
GERMAN_SCHEDULE = (
    ("ifo", 6, 15, (0, 1)),
    ("ifo", 9, 15, (0, 1, 2)),
    ("ifo", 12, 15, (0, 1)),
    ("gd", 4, 15, (0, 1)),
    ("gd", 10, 15, (0, 1)),
    ("ec", 2, 10, (0,)),
    ("ec", 5, 5, (0, 1)),
    ("ec", 11, 5, (0, 1)),
)
INSTITUTION_NOISE = {"ifo": 0.15, "gd": 0.12, "ec": 0.18, "spf": 0.1}


class _World:
    """A monthly path with forecasts by information set."""

    def __init__(self, params: Ar1Params, first_year: int, n_years: int, rng):
        self.params = params
        self.first_year = first_year
        _, values = simulate_paths(params, LEAD + 12 * n_years, rng)
        self.values = values

    def _end(self, year):
        return LEAD + 12 * (year - self.first_year + 1) - 1

    def realization(self, year) -> float:
        end = self._end(year)
        return MEAN_GROWTH + float(self.values[end - 11:end + 1].sum())

    def forecast(self, year, horizon) -> float:
        end = self._end(year)
        known = end - math.ceil(horizon)
        rho = self.params.rho
        total = 0.0
        for m in range(end - 11, end + 1):
            total += self.values[m] if m <= known else rho ** (m - known) * self.values[known]
        return MEAN_GROWTH + float(total)


def _jitter_day(rng, year, month, day):
    shift = int(rng.integers(-6, 7))
    base = dt.date(year, month, 1)
    return base + dt.timedelta(days=min(max(day + shift, 1), 28) - 1)


def german_archive(seed: int = 2002):
    """Three-institution archive for target years 2002-2021."""
    rng = np.random.default_rng(seed)
    first = GERMAN_YEARS[0] - 2
    world = _World(GERMAN_PARAMS, first, GERMAN_YEARS[-1] - first + 1, rng)
    records = []
    for issue_year in range(first, GERMAN_YEARS[-1] + 1):
        for inst, month, day, ahead in GERMAN_SCHEDULE:
            if inst == "ec" and month == 11 and rng.random() < 0.15:
                date = dt.date(issue_year, 10, 15)  # occasionally coincides with the gd release
            else:
                date = _jitter_day(rng, issue_year, month, day)
            for k in ahead:
                target = issue_year + k
                if target not in GERMAN_YEARS:
                    continue
                h = code_horizon(date, target)
                point = world.forecast(target, h) + INSTITUTION_NOISE[inst] * rng.standard_normal()
                records.append(RawForecastRecord(inst, date, target, round(point, 1)))
    outcomes = {y: round(world.realization(y), 1) for y in GERMAN_YEARS}
    return records, outcomes


def us_archive(seed: int = 1981):
    """Quarterly survey archive: mid-quarter current- and next-year forecasts."""
    rng = np.random.default_rng(seed)
    first = US_YEARS[0] - 1
    world = _World(US_PARAMS, first, US_YEARS[-1] - first + 1, rng)
    records = []
    for issue_year in range(first, US_YEARS[-1] + 1):
        for quarter in range(1, 5):
            noise = rng.standard_normal(2)
            if (issue_year, quarter) < US_FIRST_ROUND or (issue_year, quarter) in US_DROPPED_ROUNDS:
                continue
            date = dt.date(issue_year, 3 * quarter - 1, 15)
            for k in (0, 1):
                target = issue_year + k
                if target not in US_YEARS:
                    continue
                h = code_horizon(date, target)
                point = world.forecast(target, h) + INSTITUTION_NOISE["spf"] * noise[k]
                records.append(RawForecastRecord("spf", date, target, round(point, 2)))
    outcomes = {y: round(world.realization(y), 2) for y in US_YEARS}
    return records, outcomes


def us_benchmark(records, outcomes):
    """Survey-style intervals: centred on the forecast and too wide at short horizons."""
    sample = build_dataset(records, outcomes)
    out = []
    for cid, h, point in zip(sample.case_id, sample.horizon, sample.point_forecast):
        half = 1.2816 * (1.2 + 0.03 * h)
        out.append(BenchmarkInterval(str(cid), round(point - half, 3), round(point + half, 3), "survey_histogram"))
    return out


def write_bundled(directory) -> list[Path]:
    """Write the bundled CSV files into ``directory``; returns their paths."""
    directory = Path(directory)
    g_records, g_outcomes = german_archive()
    u_records, u_outcomes = us_archive()
    files = {
        "german_forecasts.csv": lambda p: write_forecasts(p, g_records),
        "german_outcomes.csv": lambda p: write_outcomes(p, g_outcomes),
        "us_forecasts.csv": lambda p: write_forecasts(p, u_records),
        "us_outcomes.csv": lambda p: write_outcomes(p, u_outcomes),
        "us_benchmark.csv": lambda p: write_benchmark(p, us_benchmark(u_records, u_outcomes)),
    }
    paths = []
    for name, write in files.items():
        write(directory / name)
        paths.append(directory / name)
    return paths
