"""Leave-one-target-year-out cross-validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ar1 import Ar1Params
from .errors import CoverageGapError, DegenerateVarianceError, DomainError, FixEventError, FoldError
from .estimation import DEFAULT_LEVELS, FitConfig, FitResult, fit_ar1, fit_gauss, fit_qr
from .evaluation import EvalReport, dm_test, evaluate_model
from .models import IntervalForecast, interval_bounds, interval_levels
from .records import ErrorSample, as_sample

MODEL_KINDS = ("ar1", "gauss", "qr", "truth")


@dataclass(frozen=True)
class ModelSpec:
    """A model variant run through cross-validation.

    ``kind`` is one of ``ar1``, ``gauss``, ``qr`` or ``truth``; the last
    predicts from the fixed ``truth`` parameters without fitting.
    """

    name: str
    kind: str
    config: FitConfig = FitConfig()
    levels: tuple = DEFAULT_LEVELS
    truth: Optional[Ar1Params] = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise DomainError(f"unknown model kind {self.kind!r}")
        if self.kind == "truth" and self.truth is None:
            raise DomainError("a truth model needs fixed parameters")

    @classmethod
    def named(cls, name: str, config: FitConfig = FitConfig()) -> "ModelSpec":
        """Standard variants: ``ar1``, ``gauss``, ``gauss12``, ``qr``, ``qr12``.

        The ``12`` suffix fixes theta at 12; the others follow ``config``.
        """
        fixed = FitConfig.fixed(12.0, optimizer_restarts=config.optimizer_restarts,
                                tolerance=config.tolerance, seed=config.seed)
        table = {
            "ar1": ("ar1", config),
            "gauss": ("gauss", config),
            "gauss12": ("gauss", fixed),
            "qr": ("qr", config),
            "qr12": ("qr", fixed),
        }
        if name not in table:
            raise DomainError(f"unknown model name {name!r}; choose from {sorted(table)}")
        kind, cfg = table[name]
        return cls(name=name, kind=kind, config=cfg)

    def fit(self, sample, warm=None) -> FitResult:
        if self.kind == "ar1":
            return fit_ar1(sample, self.config, warm=warm)
        if self.kind == "gauss":
            return fit_gauss(sample, self.config, warm=warm)
        if self.kind == "qr":
            return fit_qr(sample, self.config, levels=self.levels, warm=warm)
        return FitResult("truth", self.truth, float("nan"))


@dataclass(frozen=True)
class CvPlan:
    model_specs: tuple
    nominal_level: float = 0.8
    warm_start: bool = True

    def __post_init__(self):
        names = [s.name for s in self.model_specs]
        if not names or len(set(names)) != len(names):
            raise DomainError("model specs must be nonempty with unique names")
        lo, hi = interval_levels(self.nominal_level)
        for s in self.model_specs:
            if s.kind == "qr" and not {lo, hi} <= set(s.levels):
                raise DomainError(f"{s.name}: levels {s.levels} do not bound a {self.nominal_level} interval")


@dataclass(frozen=True)
class CvFold:
    year: int
    train_ids: frozenset
    test_ids: tuple


@dataclass
class CvOutput:
    """Out-of-sample intervals per model and the fits behind them.

    ``predictions[name][case_id]`` is an :class:`IntervalForecast`;
    ``fits[name]`` lists ``(held-out year, FitResult)`` in year order.
    """

    years: list
    nominal_level: float
    predictions: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)
    crossings: dict = field(default_factory=dict)
    folds: list = field(default_factory=list)

    @property
    def n_iterations(self) -> int:
        return len(self.years)

    def theta_range(self, name: str):
        thetas = [f.theta for _, f in self.fits[name] if f.theta is not None]
        return (min(thetas), max(thetas)) if thetas else None


def run_cv(dataset, plan: CvPlan, replication=None) -> CvOutput:
    """Fit every model on all years but one and predict the held-out year.

    Folds run in increasing year order; with ``plan.warm_start`` each fit
    starts from the previous fold's solution.

    Raises
    ------
    FoldError
        If any model cannot be fitted on some fold; no partial output is
        returned.
    """
    sample = as_sample(dataset)
    years = sample.years
    if len(years) < 2:
        raise DomainError(f"cross-validation needs at least two target years, got {len(years)}")
    ids = np.asarray([str(c) for c in sample.case_id], dtype=object)
    if len(set(ids)) != len(ids):
        raise DomainError("case ids must be unique")
    out = CvOutput(years=list(years), nominal_level=plan.nominal_level)
    for spec in plan.model_specs:
        out.predictions[spec.name] = {}
        out.fits[spec.name] = []
        out.crossings[spec.name] = 0
    previous = {}
    for year in years:
        test = sample.target_year == year
        train = sample.subset(~test)
        out.folds.append(CvFold(int(year), frozenset(ids[~test]), tuple(ids[test])))
        h_test = sample.horizon[test]
        for spec in plan.model_specs:
            warm = previous.get(spec.name) if plan.warm_start else None
            try:
                fit = spec.fit(train, warm=warm)
                lo, hi, crossed = interval_bounds(fit.params, h_test, plan.nominal_level)
            except (FixEventError, ValueError, ArithmeticError) as exc:
                raise FoldError(int(year), f"{spec.name}: {exc}", replication) from exc
            previous[spec.name] = fit
            out.fits[spec.name].append((int(year), fit))
            out.crossings[spec.name] += int(crossed.sum())
            preds = out.predictions[spec.name]
            for cid, l, u, c in zip(ids[test], lo, hi, crossed):
                preds[cid] = IntervalForecast(float(l), float(u), plan.nominal_level, bool(c))
    return out


def audit_separation(output: CvOutput, dataset) -> bool:
    """True if no fold trained on a case from its held-out year.

    Checks set disjointness of training and test ids and that every
    training id belongs to a different target year.
    """
    sample = as_sample(dataset)
    year_of = {str(c): int(y) for c, y in zip(sample.case_id, sample.target_year)}
    for fold in output.folds:
        if fold.train_ids.intersection(fold.test_ids):
            return False
        if any(year_of[c] == fold.year for c in fold.train_ids):
            return False
        if any(year_of[c] != fold.year for c in fold.test_ids):
            return False
    return True


@dataclass
class CvSummary:
    reports: dict
    theta_ranges: dict
    dm_tests: dict
    baseline: str
    crossings: dict
    n_iterations: int

    def to_dict(self) -> dict:
        def dm(r):
            if r is None:
                return "n/a"
            return {"t_basic": r.t_basic, "t_clustered": r.t_clustered, "n_cases": r.n_cases,
                    "n_clusters": r.n_clusters, "mean_score_diff": r.mean_score_diff}

        return {
            "n_iterations": self.n_iterations,
            "baseline": self.baseline,
            "models": {
                name: {
                    **rep.summary(),
                    "theta_range": None if self.theta_ranges[name] is None else list(self.theta_ranges[name]),
                    "quantile_crossings": self.crossings[name],
                    "dm_vs_baseline": dm(self.dm_tests.get(name)),
                }
                for name, rep in self.reports.items()
            },
        }


def summarize_cv(output: CvOutput, outcomes, baseline: Optional[str] = "ar1") -> CvSummary:
    """Per-model evaluation, theta ranges and DM tests against ``baseline``.

    A comparison whose score differences have zero variance (e.g. the
    baseline against itself) is reported as ``None``.

    Raises
    ------
    CoverageGapError
        If some case lacks a prediction from some model.
    """
    sample: ErrorSample = as_sample(outcomes)
    ids = [str(c) for c in sample.case_id]
    reports: dict[str, EvalReport] = {}
    for name, preds in output.predictions.items():
        missing = [c for c in ids if c not in preds]
        if missing:
            raise CoverageGapError(f"{name}: {len(missing)} cases lack predictions, e.g. {missing[:3]}")
        reports[name] = evaluate_model(preds, sample, output.nominal_level)
    dm = {}
    if baseline is not None and baseline in reports:
        base = [c.interval_score for c in reports[baseline].cases]
        for name, rep in reports.items():
            try:
                dm[name] = dm_test([c.interval_score for c in rep.cases], base, sample.target_year)
            except DegenerateVarianceError:
                dm[name] = None
    return CvSummary(
        reports=reports,
        theta_ranges={name: output.theta_range(name) for name in output.predictions},
        dm_tests=dm,
        baseline=baseline,
        crossings=dict(output.crossings),
        n_iterations=output.n_iterations,
    )
