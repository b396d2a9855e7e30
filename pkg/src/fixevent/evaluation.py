"""Interval scoring, coverage and Diebold-Mariano comparisons."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateVarianceError, DomainError, JoinError
from .models import tick_loss
from .records import as_sample

CRITICAL_VALUE = 1.96


def penalty_weight(nominal_level: float) -> float:
    if not 0.0 < nominal_level < 1.0:
        raise DomainError(f"nominal level must lie in (0, 1), got {nominal_level}")
    return 2.0 / (1.0 - nominal_level)


def interval_score(lower, upper, y, nominal_level: float = 0.8):
    """Width plus ``2 / (1 - level)`` times the distance of a miss.

    Vectorized over ``lower``, ``upper`` and ``y``.
    """
    lower, upper, y = (np.asarray(v, dtype=float) for v in (lower, upper, y))
    if np.any(lower > upper):
        raise DomainError("interval lower bound exceeds upper bound")
    w = penalty_weight(nominal_level)
    out = (upper - lower) + w * np.maximum(lower - y, 0.0) + w * np.maximum(y - upper, 0.0)
    return float(out) if out.ndim == 0 else out


def quantile_score(alpha, q, y):
    """Twice the tick loss, so the interval score is ``W / 2`` times the sum of two of them."""
    return 2.0 * tick_loss(alpha, q, y)


@dataclass(frozen=True)
class ScoredCase:
    case_id: str
    target_year: int
    horizon: float
    lower: float
    upper: float
    outcome_error: float
    interval_score: float
    covered: bool
    length: float


def score_cases(case_ids, target_years, horizons, lower, upper, outcomes, nominal_level=0.8):
    scores = interval_score(lower, upper, outcomes, nominal_level)
    scores = np.atleast_1d(scores)
    return [
        ScoredCase(
            case_id=str(case_ids[i]),
            target_year=int(target_years[i]),
            horizon=float(horizons[i]),
            lower=float(lower[i]),
            upper=float(upper[i]),
            outcome_error=float(outcomes[i]),
            interval_score=float(scores[i]),
            covered=bool(lower[i] <= outcomes[i] <= upper[i]),
            length=float(upper[i] - lower[i]),
        )
        for i in range(len(scores))
    ]


def coverage_and_length(cases) -> tuple[float, float, float]:
    """Coverage rate, mean length and mean interval score."""
    cases = list(cases)
    if not cases:
        raise DomainError("no cases to aggregate")
    n = len(cases)
    return (
        sum(c.covered for c in cases) / n,
        math.fsum(c.length for c in cases) / n,
        math.fsum(c.interval_score for c in cases) / n,
    )


@dataclass(frozen=True)
class EvalReport:
    cases: list
    coverage: float
    mean_length: float
    mean_interval_score: float
    by_horizon: dict = field(default_factory=dict)

    @property
    def n_cases(self) -> int:
        return len(self.cases)

    def summary(self) -> dict:
        return {
            "n_cases": self.n_cases,
            "coverage": self.coverage,
            "mean_length": self.mean_length,
            "mean_interval_score": self.mean_interval_score,
            "by_horizon": [
                {"horizon": h, "n_cases": v[0], "coverage": v[1], "mean_length": v[2],
                 "mean_interval_score": v[3]}
                for h, v in sorted(self.by_horizon.items())
            ],
        }


def _horizon_breakdown(cases):
    groups = defaultdict(list)
    for c in cases:
        groups[c.horizon].append(c)
    return {h: (len(g),) + coverage_and_length(g) for h, g in groups.items()}


def evaluate_model(predictions, outcomes, nominal_level: float = 0.8) -> EvalReport:
    """Score per-case interval forecasts against realized errors.

    Parameters
    ----------
    predictions : mapping
        ``case_id -> IntervalForecast``.
    outcomes : ErrorSample or sequence of ErrorObservation
        Realized errors with target years and horizons.

    Raises
    ------
    JoinError
        If the case ids of the two inputs differ or do not overlap.
    """
    sample = as_sample(outcomes)
    ids = [str(c) for c in sample.case_id]
    if len(set(ids)) != len(ids):
        raise JoinError("duplicate case ids in outcomes")
    pred_ids, out_ids = set(predictions), set(ids)
    if not pred_ids & out_ids:
        raise JoinError("predictions and outcomes share no case ids")
    if pred_ids != out_ids:
        missing = sorted(out_ids - pred_ids)[:5]
        extra = sorted(pred_ids - out_ids)[:5]
        raise JoinError(f"case ids do not align (unpredicted: {missing}, unknown: {extra})")
    lower = np.array([predictions[c].lower for c in ids])
    upper = np.array([predictions[c].upper for c in ids])
    cases = score_cases(ids, sample.target_year, sample.horizon, lower, upper, sample.error, nominal_level)
    cov, length, score = coverage_and_length(cases)
    return EvalReport(cases, cov, length, score, _horizon_breakdown(cases))


@dataclass(frozen=True)
class DmTestResult:
    t_basic: float
    t_clustered: float
    n_cases: int
    n_clusters: int
    mean_score_diff: float

    @property
    def significant_basic(self) -> bool:
        return abs(self.t_basic) > CRITICAL_VALUE

    @property
    def significant_clustered(self) -> bool:
        return abs(self.t_clustered) > CRITICAL_VALUE


def dm_test(scores_a, scores_b, cluster_ids) -> DmTestResult:
    """Test of equal mean score; positive statistics mean A scores worse.

    The basic variance of the mean is ``s^2 / n`` with the ``n - 1``
    sample variance.  The clustered variance sums squared within-cluster
    sums of demeaned differences and divides by ``n (n - 1)``, which makes
    both statistics identical when every cluster holds one case.
    """
    a = np.asarray(scores_a, dtype=float)
    b = np.asarray(scores_b, dtype=float)
    clusters = np.asarray(cluster_ids)
    n = len(a)
    if len(b) != n or len(clusters) != n:
        raise DomainError("scores and cluster ids must have equal lengths")
    if n < 2:
        raise DomainError("need at least two cases")
    _, inverse = np.unique(clusters, return_inverse=True)
    n_clusters = int(inverse.max()) + 1
    if n_clusters < 2:
        raise DomainError("need at least two clusters")
    d = a - b
    mean = float(np.mean(d))
    dev = d - mean
    # correctly rounded sums keep the two variances equal bit for bit
    # when every cluster holds a single case
    var_basic = math.fsum(dev * dev) / (n * (n - 1))
    sums = np.bincount(inverse, weights=dev, minlength=n_clusters)
    var_cluster = math.fsum(sums * sums) / (n * (n - 1))
    if not var_basic > 0.0 or not var_cluster > 0.0:
        raise DegenerateVarianceError("score differences have zero variance")
    return DmTestResult(
        t_basic=mean / math.sqrt(var_basic),
        t_clustered=mean / math.sqrt(var_cluster),
        n_cases=n,
        n_clusters=n_clusters,
        mean_score_diff=mean,
    )
