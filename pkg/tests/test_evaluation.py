import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import norm

from fixevent.errors import DegenerateVarianceError, DomainError, JoinError
from fixevent.evaluation import (
    ScoredCase,
    coverage_and_length,
    dm_test,
    evaluate_model,
    interval_score,
    quantile_score,
)
from fixevent.models import IntervalForecast, tick_loss
from fixevent.records import ErrorSample


def case(lower, upper, y, level=0.8):
    return ScoredCase("c", 2000, 1.0, lower, upper, y, interval_score(lower, upper, y, level),
                      lower <= y <= upper, upper - lower)


def test_interval_score_examples():
    assert interval_score(0, 1, 0.5, 0.8) == 1.0
    assert interval_score(0, 1, 2, 0.8) == pytest.approx(11.0)
    assert interval_score(0, 1, -1, 0.8) == pytest.approx(11.0)


def test_interval_score_rejects_reversed():
    with pytest.raises(DomainError):
        interval_score(1, 0, 0.5)


def test_decomposition_into_quantile_scores(rng):
    lo = rng.normal(-1, 1, 1000)
    up = lo + rng.exponential(2, 1000)
    y = rng.normal(0, 2, 1000)
    lhs = interval_score(lo, up, y, 0.8)
    np.testing.assert_allclose(lhs, 10 * (tick_loss(0.1, lo, y) + tick_loss(0.9, up, y)), rtol=0, atol=1e-12)
    np.testing.assert_allclose(lhs, 5 * (quantile_score(0.1, lo, y) + quantile_score(0.9, up, y)), atol=1e-12)


@pytest.mark.parametrize("level", [0.5, 0.9])
def test_weight_generalization(level, rng):
    lo = rng.normal(-1, 1, 200)
    up = lo + rng.exponential(2, 200)
    y = rng.normal(0, 2, 200)
    a = (1 - level) / 2
    w = 2 / (1 - level)
    np.testing.assert_allclose(interval_score(lo, up, y, level),
                               w * (tick_loss(a, lo, y) + tick_loss(1 - a, up, y)), atol=1e-11)


def test_quantile_score_values():
    assert quantile_score(0.5, 1.0, 1.0) == 0.0
    assert quantile_score(0.9, 0.0, 1.0) == pytest.approx(1.8)


def test_interval_score_proper_monte_carlo():
    rng = np.random.default_rng(3)
    y = rng.normal(0, 1, 200000)
    z = norm.ppf(0.9)
    best = np.mean(interval_score(-z, z, y, 0.8))
    for lo, up in [(-z + 0.2, z + 0.2), (-0.8 * z, 0.8 * z), (-1.2 * z, 1.2 * z)]:
        assert np.mean(interval_score(lo, up, y, 0.8)) > best


def test_coverage_and_length():
    assert coverage_and_length([case(0.5, 0.5, 0.5)]) == (1.0, 0.0, 0.0)
    cov, _, _ = coverage_and_length([case(0, 1, 0.5), case(0, 1, 2)])
    assert cov == 0.5
    assert coverage_and_length([case(0, 1, 0.5)] * 3) == (1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        coverage_and_length([])


@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(0, 5), st.floats(-8, 8)), min_size=1, max_size=30),
       st.randoms())
@settings(max_examples=40, deadline=None)
def test_aggregates_order_invariant(rows, rnd):
    cases = [case(l, l + w, y) for l, w, y in rows]
    shuffled = cases[:]
    rnd.shuffle(shuffled)
    assert coverage_and_length(cases) == coverage_and_length(shuffled)


def outcomes(ids, years, horizons, errors):
    return ErrorSample(case_id=ids, target_year=years, horizon=horizons, error=errors)


def test_evaluate_model_two_cases():
    preds = {"a": IntervalForecast(-0.5, 0.5, 0.8), "b": IntervalForecast(-1.0, 2.0, 0.8)}
    rep = evaluate_model(preds, outcomes(["a", "b"], [1, 2], [3.0, 5.0], [0.0, 1.0]))
    assert rep.coverage == 1.0 and rep.mean_length == 2.0 and rep.mean_interval_score == 2.0


def test_evaluate_model_join_errors():
    preds = {"x": IntervalForecast(0, 1, 0.8)}
    with pytest.raises(JoinError):
        evaluate_model(preds, outcomes(["a"], [1], [1.0], [0.0]))
    with pytest.raises(JoinError):
        evaluate_model({"a": IntervalForecast(0, 1, 0.8)}, outcomes(["a", "b"], [1, 1], [1.0, 2.0], [0.0, 0.0]))


def test_horizon_breakdown_sums_to_total(rng):
    n = 60
    ids = [f"c{i}" for i in range(n)]
    h = rng.integers(1, 5, n).astype(float)
    e = rng.normal(0, 1, n)
    preds = {c: IntervalForecast(-1.0, 1.0 + 0.1 * i, 0.8) for i, c in enumerate(ids)}
    rep = evaluate_model(preds, outcomes(ids, np.arange(n) % 7, h, e))
    total = sum(v[0] * v[3] for v in rep.by_horizon.values()) / n
    assert total == pytest.approx(rep.mean_interval_score, rel=1e-12)
    assert sum(v[0] for v in rep.by_horizon.values()) == n


def test_dm_zero_mean():
    r = dm_test([1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0], [1, 2, 3, 4])
    assert r.t_basic == 0.0


def test_dm_identical_inputs_degenerate():
    with pytest.raises(DegenerateVarianceError):
        dm_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], [1, 2, 3])


def test_dm_antisymmetric(rng):
    a, b = rng.exponential(1, 50), rng.exponential(1, 50)
    cl = rng.integers(0, 8, 50)
    r1, r2 = dm_test(a, b, cl), dm_test(b, a, cl)
    assert r1.t_basic == -r2.t_basic and r1.t_clustered == -r2.t_clustered


def test_dm_one_case_per_cluster_exact(rng):
    for _ in range(20):
        a, b = rng.exponential(1, 31), rng.exponential(1, 31)
        r = dm_test(a, b, rng.permutation(31))
        assert r.t_basic == r.t_clustered


def test_dm_positive_when_a_worse():
    r = dm_test([2.0, 3.0, 2.5, 3.5], [1.0, 1.1, 0.9, 1.2], [1, 1, 2, 2])
    assert r.t_basic > 0 and r.t_clustered > 0 and r.n_clusters == 2 and r.n_cases == 4


def test_dm_needs_two_clusters():
    with pytest.raises(DomainError):
        dm_test([1.0, 2.0], [0.0, 0.5], [1, 1])


def test_dm_size_under_null():
    rng = np.random.default_rng(11)
    rejections = 0
    for _ in range(1000):
        d = rng.normal(0, 1, 100)
        rejections += dm_test(d, np.zeros(100), np.arange(100) // 5).significant_basic
    assert 0.02 <= rejections / 1000 <= 0.09
