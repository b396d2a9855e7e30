import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.stats import norm

from fixevent.ar1 import Ar1Params, sigma_h
from fixevent.errors import DomainError, InvalidParameterError, MissingCoefficientError
from fixevent.models import (
    GaussParams,
    IntervalForecast,
    QrParams,
    ar1_quantile,
    central_interval,
    crps_gaussian,
    gauss_quantile,
    interval_bounds,
    qr_quantile,
    quantile,
    tick_loss,
)

Z90 = norm.ppf(0.9)


def crps_by_quantile_integral(mu, sigma, y):
    """Integral over levels of twice the tick loss at the normal quantile."""
    f = lambda a: 2.0 * tick_loss(a, norm.ppf(a, mu, sigma), y)
    val, _ = integrate.quad(f, 0.0, 1.0, limit=400, epsabs=1e-12, epsrel=1e-12)
    return val


def test_ar1_median_is_zero():
    assert ar1_quantile(Ar1Params(0.5, 0.1), 7.5, 0.5) == 0.0


def test_ar1_quantile_value():
    assert ar1_quantile(Ar1Params(0.0, 0.1), 12, 0.9) == pytest.approx(Z90 * math.sqrt(1.2), rel=1e-12)
    # the rounded reference 1.2816 * sqrt(1.2) ~ 1.4040 carries 4-digit rounding
    assert ar1_quantile(Ar1Params(0.0, 0.1), 12, 0.9) == pytest.approx(1.4040, abs=2e-4)


@given(st.floats(0.0, 0.98), st.integers(0, 48), st.integers(1, 999999))
@settings(max_examples=80, deadline=None)
def test_ar1_quantile_symmetric(rho, h2, k):
    p = Ar1Params(rho, 0.1)
    alpha = k / 1e6
    assert ar1_quantile(p, h2 / 2, alpha) == -ar1_quantile(p, h2 / 2, 1 - alpha)


def test_ar1_quantile_vectorized():
    p = Ar1Params(0.5, 0.1)
    h = np.array([1.0, 6.0, 12.5])
    np.testing.assert_allclose(ar1_quantile(p, h, 0.9), [ar1_quantile(p, v, 0.9) for v in h])


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
def test_alpha_domain(alpha):
    with pytest.raises(DomainError):
        ar1_quantile(Ar1Params(0.5, 0.1), 3, alpha)


def test_gauss_quantile_values():
    assert gauss_quantile(GaussParams(0.3, 0.4, 0.1, 12), 5, 0.5) == pytest.approx(0.3)
    assert gauss_quantile(GaussParams(0.0, 0.5, 0.1, 12), 20, 0.9) == pytest.approx(Z90 * 1.7, rel=1e-12)
    assert gauss_quantile(GaussParams(0.0, 0.5, 0.1, 12), 20, 0.9) == pytest.approx(2.1787, abs=1e-4)


def test_gauss_saturates():
    p = GaussParams(0.1, 0.3, 0.2, 12)
    assert gauss_quantile(p, 15, 0.8) == gauss_quantile(p, 25, 0.8)


def test_gauss_nonpositive_sigma():
    with pytest.raises(InvalidParameterError):
        gauss_quantile(GaussParams(0.0, -1.0, 0.05, 10), 3, 0.9)


@pytest.mark.parametrize("theta", [4.5, 20.5])
def test_theta_range(theta):
    with pytest.raises(InvalidParameterError):
        GaussParams(0.0, 1.0, 0.0, theta)
    with pytest.raises(InvalidParameterError):
        QrParams(theta, (0.1, 0.9), ((0, 0), (1, 0)))


def test_qr_quantile():
    p = QrParams(12, (0.1, 0.9), ((-1.0, -0.1), (1.0, 0.1)))
    assert qr_quantile(p, 6, 0.1) == pytest.approx(-1.6)
    assert qr_quantile(p, 12, 0.9) == qr_quantile(p, 17, 0.9)
    flat = QrParams(12, (0.5,), ((0.2, 0.0),))
    assert qr_quantile(flat, 1, 0.5) == qr_quantile(flat, 30, 0.5) == 0.2


def test_qr_missing_level():
    p = QrParams(12, (0.1, 0.9), ((0, 0), (1, 0)))
    with pytest.raises(MissingCoefficientError):
        qr_quantile(p, 3, 0.5)
    assert qr_quantile(p, 3, 0.1 + 1e-12) == 0.0  # float noise tolerated


def test_qr_levels_validated():
    with pytest.raises(DomainError):
        QrParams(12, (0.9, 0.1), ((0, 0), (1, 0)))
    with pytest.raises(DomainError):
        QrParams(12, (0.1,), ((0, 0), (1, 0)))


def test_central_interval_gauss():
    p = GaussParams(0.2, 0.5, 0.05, 10)
    iv = central_interval(p, 4, 0.8)
    s = 0.5 + 0.05 * 4
    assert iv.lower == pytest.approx(0.2 - Z90 * s)
    assert iv.upper == pytest.approx(0.2 + Z90 * s)
    assert not iv.crossed


def test_central_interval_ar1_width():
    p = Ar1Params(0.7, 0.1)
    iv = central_interval(p, 9, 0.8)
    assert iv.length == pytest.approx(2 * Z90 * sigma_h(p, 9))


def test_crossed_qr_quantiles_swapped():
    p = QrParams(12, (0.1, 0.9), ((0.5, 0.0), (-0.5, 0.0)))
    iv = central_interval(p, 3, 0.8)
    assert iv.lower == -0.5 and iv.upper == 0.5 and iv.crossed
    lo, hi, crossed = interval_bounds(p, np.array([1.0, 2.0]), 0.8)
    assert np.all(lo <= hi) and crossed.all()


def test_interval_forecast_order():
    with pytest.raises(DomainError):
        IntervalForecast(1.0, 0.0, 0.8)


def test_quantile_dispatch_type():
    with pytest.raises(TypeError):
        quantile(object(), 1.0, 0.5)


def test_crps_standard_normal_at_zero():
    oracle = crps_by_quantile_integral(0.0, 1.0, 0.0)
    assert oracle == pytest.approx(0.23370, abs=1e-4)
    assert crps_gaussian(0, 1, 0) == pytest.approx(oracle, abs=1e-6)
    assert crps_gaussian(0, 1, 0) == pytest.approx(2 / math.sqrt(2 * math.pi) - 1 / math.sqrt(math.pi), rel=1e-14)


def test_crps_point_mass():
    assert crps_gaussian(0.3, 0.0, -1.2) == pytest.approx(1.5)


def test_crps_negative_sigma():
    with pytest.raises(DomainError):
        crps_gaussian(0, -0.1, 0)


@given(st.floats(0.01, 5), st.floats(0.05, 5), st.floats(-5, 5))
@settings(max_examples=60, deadline=None)
def test_crps_homogeneous(c, sigma, y):
    assert crps_gaussian(0, c * sigma, c * y) == pytest.approx(c * crps_gaussian(0, sigma, y), rel=1e-9, abs=1e-12)


@given(st.floats(-3, 3), st.floats(0.05, 4), st.floats(-6, 6))
@settings(max_examples=60, deadline=None)
def test_crps_nonnegative(mu, sigma, y):
    assert crps_gaussian(mu, sigma, y) >= 0.0


def test_tick_loss_values():
    assert tick_loss(0.9, 0.0, 1.0) == pytest.approx(0.9)
    assert tick_loss(0.1, 1.0, 0.0) == pytest.approx(0.9)
    assert tick_loss(0.3, 2.0, 2.0) == 0.0


@given(st.floats(0.01, 0.99), st.floats(-10, 10), st.floats(-10, 10))
@settings(max_examples=80, deadline=None)
def test_tick_loss_nonnegative(alpha, q, y):
    assert tick_loss(alpha, q, y) >= 0.0
