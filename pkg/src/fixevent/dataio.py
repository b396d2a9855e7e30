"""Reading forecast archives, coding horizons and writing reports.

Inputs are headed CSV files; reports are JSON.  Every write goes to a
temporary file in the target directory and is renamed into place.
"""

from __future__ import annotations

import calendar
import csv
import datetime as dt
import io
import json
import math
import os
import tempfile
from collections import defaultdict
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataError, DomainError
from .models import IntervalForecast
from .records import BenchmarkInterval, ErrorObservation, ErrorSample, RawForecastRecord

FORECAST_COLUMNS = ("institution", "forecast_date", "target_year", "point_forecast")
OUTCOME_COLUMNS = ("target_year", "realization")
BENCHMARK_COLUMNS = ("case_id", "lower", "upper", "source")
OBSERVATION_COLUMNS = ("case_id", "target_year", "horizon", "error", "point_forecast", "realization")
INTERVAL_COLUMNS = ("case_id", "horizon", "lower", "upper", "nominal_level", "crossed")
HORIZON_MODES = ("half", "ceiling")

# offsets from the month's end, for the beginning / middle / end anchors
_ANCHOR_OFFSETS = (1.0, 0.5, 0.0)


def code_horizon(forecast_date: dt.date, target_year: int) -> float:
    """Months from the forecast date to the end of the target year.

    The date is classified to the nearest of day 1, day 15 and the last
    day of its month (ties go to the earlier anchor), contributing 1, 0.5
    or 0 months on top of the whole months after the forecast month.
    """
    last = calendar.monthrange(forecast_date.year, forecast_date.month)[1]
    day = forecast_date.day
    distances = (abs(day - 1), abs(day - 15), abs(last - day))
    anchor = distances.index(min(distances))
    h = 12 * (target_year - forecast_date.year) + (12 - forecast_date.month) + _ANCHOR_OFFSETS[anchor]
    if forecast_date.year > target_year:
        raise DomainError(f"forecast dated {forecast_date} is after the end of {target_year}")
    return float(h)


def ceiling_horizon(h: float) -> int:
    if h < 0:
        raise DomainError(f"horizon must be nonnegative, got {h}")
    return int(math.ceil(h))


def case_id_for(target_year: int, horizon: float) -> str:
    return f"{int(target_year)}-h{horizon:g}"


def build_dataset(records, outcomes, mode: str = "half") -> ErrorSample:
    """Turn raw forecasts and per-year realizations into forecast errors.

    Forecasts sharing a target year and coded horizon are averaged across
    institutions.  In ``ceiling`` mode the same cases are kept with their
    horizon rounded up.  Cases are ordered by target year, then horizon.

    Raises
    ------
    DataError
        If a target year has no realization.
    """
    if mode not in HORIZON_MODES:
        raise DomainError(f"horizon mode must be one of {HORIZON_MODES}, got {mode!r}")
    groups = defaultdict(list)
    for r in records:
        groups[(int(r.target_year), code_horizon(r.forecast_date, r.target_year))].append(float(r.point_forecast))
    if not groups:
        raise DataError("no forecast records")
    missing = sorted({year for year, _ in groups if year not in outcomes})
    if missing:
        raise DataError(f"no realization for target year(s) {missing}")
    keys = sorted(groups)
    forecasts = np.array([math.fsum(groups[k]) / len(groups[k]) for k in keys])
    realized = np.array([float(outcomes[y]) for y, _ in keys])
    horizons = np.array([h for _, h in keys])
    if mode == "ceiling":
        horizons = np.ceil(horizons)
    return ErrorSample(
        case_id=[case_id_for(y, h) for y, h in keys],
        target_year=[y for y, _ in keys],
        horizon=horizons,
        error=realized - forecasts,
        point_forecast=forecasts,
        realization=realized,
    )


def _rows(path, columns):
    """Yield ``(line number, row dict)`` from a headed CSV file."""
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    with handle:
        reader = csv.DictReader(handle)
        header = tuple(reader.fieldnames or ())
        if not set(columns) <= set(header):
            raise DataError(f"{path}: header {list(header)} lacks columns {sorted(set(columns) - set(header))}")
        for row in reader:
            yield reader.line_num, row


def _field(path, line, row, name, convert):
    value = row.get(name)
    try:
        out = convert(value.strip())
    except (AttributeError, ValueError) as exc:
        raise DataError(f"{path}:{line}: bad {name} {value!r}") from exc
    if isinstance(out, float) and not math.isfinite(out):
        raise DataError(f"{path}:{line}: non-finite {name} {value!r}")
    return out


def _optional_float(text):
    return None if text == "" else float(text)


def read_forecasts(path) -> list[RawForecastRecord]:
    return [
        RawForecastRecord(
            institution=row["institution"].strip(),
            forecast_date=_field(path, line, row, "forecast_date", dt.date.fromisoformat),
            target_year=_field(path, line, row, "target_year", int),
            point_forecast=_field(path, line, row, "point_forecast", float),
        )
        for line, row in _rows(path, FORECAST_COLUMNS)
    ]


def read_outcomes(path) -> dict[int, float]:
    out = {}
    for line, row in _rows(path, OUTCOME_COLUMNS):
        year = _field(path, line, row, "target_year", int)
        if year in out:
            raise DataError(f"{path}:{line}: duplicate realization for {year}")
        out[year] = _field(path, line, row, "realization", float)
    return out


def read_benchmark(path) -> list[BenchmarkInterval]:
    out = []
    for line, row in _rows(path, BENCHMARK_COLUMNS):
        try:
            out.append(BenchmarkInterval(
                case_id=row["case_id"].strip(),
                lower=_field(path, line, row, "lower", float),
                upper=_field(path, line, row, "upper", float),
                source=(row.get("source") or "").strip(),
            ))
        except DomainError as exc:
            raise DataError(f"{path}:{line}: {exc}") from exc
    return out


def read_observations(path) -> ErrorSample:
    obs = []
    for line, row in _rows(path, OBSERVATION_COLUMNS[:4]):
        try:
            obs.append(ErrorObservation(
                case_id=row["case_id"].strip(),
                target_year=_field(path, line, row, "target_year", int),
                horizon=_field(path, line, row, "horizon", float),
                error=_field(path, line, row, "error", float),
                point_forecast=_field(path, line, row, "point_forecast", _optional_float) if "point_forecast" in row else None,
                realization=_field(path, line, row, "realization", _optional_float) if "realization" in row else None,
            ))
        except DomainError as exc:
            raise DataError(f"{path}:{line}: {exc}") from exc
    if not obs:
        raise DataError(f"{path}: no observations")
    ids = [o.case_id for o in obs]
    if len(set(ids)) != len(ids):
        raise DataError(f"{path}: duplicate case ids")
    return ErrorSample.from_observations(obs)


def sniff_columns(path) -> tuple:
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            return tuple(next(csv.reader(handle), ()))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc


def load_dataset(path, outcomes_path=None, mode: str = "half") -> ErrorSample:
    """Load an error sample from an observation CSV or a forecast archive.

    A forecast archive (``institution,forecast_date,...``) needs an
    outcomes file.  Observation files are taken as coded; ``ceiling``
    mode rounds their horizons up.
    """
    cols = set(sniff_columns(path))
    if set(FORECAST_COLUMNS) <= cols:
        if outcomes_path is None:
            raise DataError(f"{path} is a forecast archive; an outcomes file is required")
        return build_dataset(read_forecasts(path), read_outcomes(outcomes_path), mode)
    if set(OBSERVATION_COLUMNS[:4]) <= cols:
        sample = read_observations(path)
        if mode == "ceiling":
            sample = sample.with_horizon(np.ceil(sample.horizon))
        elif mode not in HORIZON_MODES:
            raise DomainError(f"horizon mode must be one of {HORIZON_MODES}, got {mode!r}")
        return sample
    raise DataError(f"{path}: unrecognized header {sorted(cols)}")


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to a temporary sibling file, then rename it over ``path``."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, allow_nan=False) + "\n")


def read_json(path):
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def write_observations(path, sample: ErrorSample) -> None:
    rows = zip(sample.case_id, sample.target_year, sample.horizon, sample.error,
               sample.point_forecast, sample.realization)
    atomic_write_text(path, _csv_text(OBSERVATION_COLUMNS, ([c, int(t), h, e, f, r] for c, t, h, e, f, r in rows)))


def write_forecasts(path, records) -> None:
    atomic_write_text(path, _csv_text(FORECAST_COLUMNS, (
        [r.institution, r.forecast_date.isoformat(), r.target_year, r.point_forecast] for r in records)))


def write_outcomes(path, outcomes: dict) -> None:
    atomic_write_text(path, _csv_text(OUTCOME_COLUMNS, ([y, outcomes[y]] for y in sorted(outcomes))))


def write_benchmark(path, intervals) -> None:
    atomic_write_text(path, _csv_text(BENCHMARK_COLUMNS, (
        [b.case_id, b.lower, b.upper, b.source] for b in intervals)))


def intervals_to_rows(predictions: dict, horizons: dict) -> list[dict]:
    return [
        {"case_id": cid, "horizon": horizons[cid], "lower": p.lower, "upper": p.upper,
         "nominal_level": p.nominal_level, "crossed": p.crossed}
        for cid, p in predictions.items()
    ]


def write_intervals(path, predictions: dict, horizons: dict) -> None:
    write_json(path, {"intervals": intervals_to_rows(predictions, horizons)})


def read_intervals(path) -> tuple[dict, dict]:
    """Inverse of :func:`write_intervals`: ``(predictions, horizons)``."""
    data = read_json(path)
    try:
        rows = data["intervals"]
        preds = {r["case_id"]: IntervalForecast(float(r["lower"]), float(r["upper"]),
                                                float(r["nominal_level"]), bool(r["crossed"]))
                 for r in rows}
        horizons = {r["case_id"]: float(r["horizon"]) for r in rows}
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed interval file ({exc})") from exc
    return preds, horizons


def bundled_path(name: str) -> Path:
    """Path of a bundled synthetic data file, e.g. ``"german_forecasts.csv"``."""
    return Path(str(resources.files("fixevent") / "data" / name))
