"""Prediction intervals for fixed-event point forecasts.

Models of the forecast-error distribution as a function of the horizon
(months to the end of the target year), fitted to past errors and
evaluated by leave-one-year-out cross-validation.
"""

__version__ = "0.1.0"

from .ar1 import (
    Ar1Params,
    ErrorSampleDesign,
    analytic_error_covariance,
    kappa_vector,
    sigma_h,
    sigma_h_halfgrid,
    simulate_errors,
    simulate_sample,
)
from .crossval import CvPlan, ModelSpec, audit_separation, run_cv, summarize_cv
from .dataio import build_dataset, ceiling_horizon, code_horizon, load_dataset
from .estimation import FitConfig, FitResult, fit_ar1, fit_gauss, fit_qr
from .evaluation import coverage_and_length, dm_test, evaluate_model, interval_score, quantile_score
from .kernels import BACKEND
from .models import (
    GaussParams,
    IntervalForecast,
    QrParams,
    ar1_quantile,
    central_interval,
    crps_gaussian,
    gauss_quantile,
    qr_quantile,
    tick_loss,
)
from .optimize import minimize
from .records import BenchmarkInterval, ErrorObservation, ErrorSample, RawForecastRecord
from .simstudy import SimConfig, run_simstudy

__all__ = [
    "Ar1Params", "ErrorSampleDesign", "analytic_error_covariance", "kappa_vector", "sigma_h",
    "sigma_h_halfgrid", "simulate_errors", "simulate_sample",
    "CvPlan", "ModelSpec", "audit_separation", "run_cv", "summarize_cv",
    "build_dataset", "ceiling_horizon", "code_horizon", "load_dataset",
    "FitConfig", "FitResult", "fit_ar1", "fit_gauss", "fit_qr",
    "coverage_and_length", "dm_test", "evaluate_model", "interval_score", "quantile_score",
    "BACKEND",
    "GaussParams", "IntervalForecast", "QrParams", "ar1_quantile", "central_interval",
    "crps_gaussian", "gauss_quantile", "qr_quantile", "tick_loss",
    "minimize",
    "BenchmarkInterval", "ErrorObservation", "ErrorSample", "RawForecastRecord",
    "SimConfig", "run_simstudy",
]
