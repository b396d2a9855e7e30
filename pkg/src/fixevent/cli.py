"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
Failures print one JSON line ``{"error": ..., "kind": ..., "exit_code": ...}``
to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .crossval import CvPlan, ModelSpec, audit_separation, run_cv, summarize_cv
from .dataio import HORIZON_MODES, load_dataset, read_benchmark, read_intervals, read_json, write_intervals, write_json
from .errors import DataError, DegenerateVarianceError, FixEventError, FoldError, NumericalError
from .estimation import DEFAULT_LEVELS, FitConfig, FitResult
from .evaluation import dm_test, evaluate_model
from .models import IntervalForecast, interval_bounds
from .simstudy import SimConfig, run_simstudy

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 2, 3, 4
MODEL_NAMES = ("ar1", "gauss", "gauss12", "qr", "qr12")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text, what):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _theta_config(text: str, seed: int, restarts: int) -> FitConfig:
    if text == "grid":
        return FitConfig(seed=seed, optimizer_restarts=restarts)
    if text.startswith("fixed:"):
        try:
            value = float(text[len("fixed:"):])
        except ValueError:
            raise UsageError(f"--theta: bad fixed value in {text!r}") from None
        return FitConfig.fixed(value, seed=seed, optimizer_restarts=restarts)
    raise UsageError(f"--theta must be 'grid' or 'fixed:<value>', got {text!r}")


def _model_names(text: str) -> list[str]:
    names = [n.strip() for n in text.split(",") if n.strip()]
    bad = [n for n in names if n not in MODEL_NAMES]
    if bad or not names:
        raise UsageError(f"--models: unknown model(s) {bad}; choose from {list(MODEL_NAMES)}")
    if len(set(names)) != len(names):
        raise UsageError("--models: duplicate model names")
    return names


def _specs(args) -> tuple:
    config = _theta_config(args.theta, args.seed, args.restarts)
    return tuple(ModelSpec.named(n, config) for n in _model_names(args.models))


def _emit(args, obj):
    if args.out:
        write_json(args.out, obj)
    else:
        sys.stdout.write(json.dumps(obj, indent=2, allow_nan=False) + "\n")


def _dataset(args):
    return load_dataset(args.data, args.outcomes, args.horizon_mode)


def cmd_fit(args):
    spec = _specs(args)[0]
    if spec.kind == "qr":
        spec = ModelSpec(spec.name, "qr", spec.config, tuple(_floats(args.levels, "--levels")))
    fit = spec.fit(_dataset(args))
    _emit(args, {"model": spec.name, "fit": fit.to_dict()})


def cmd_predict(args):
    if not (args.data or args.horizons):
        raise UsageError("predict needs --data or --horizons")
    try:
        fit = FitResult.from_dict(read_json(args.fit)["fit"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{args.fit}: malformed fit file ({exc!s})") from exc
    if args.data:
        sample = _dataset(args)
        ids = [str(c) for c in sample.case_id]
        horizons = sample.horizon
    else:
        horizons = np.array(_floats(args.horizons, "--horizons"))
        ids = [f"h{h:g}" for h in horizons]
        if len(set(ids)) != len(ids):
            raise UsageError("--horizons: duplicate horizons")
    lo, hi, crossed = interval_bounds(fit.params, horizons, args.level)
    preds = {c: IntervalForecast(float(l), float(u), args.level, bool(x)) for c, l, u, x in zip(ids, lo, hi, crossed)}
    hmap = {c: float(h) for c, h in zip(ids, horizons)}
    if args.out:
        write_intervals(args.out, preds, hmap)
    else:
        _emit(args, {"intervals": [{"case_id": c, "horizon": hmap[c], "lower": p.lower, "upper": p.upper,
                                    "nominal_level": p.nominal_level, "crossed": p.crossed}
                                   for c, p in preds.items()]})


def _report_dict(report):
    out = report.summary()
    out["cases"] = [vars(c) for c in report.cases]
    return out


def cmd_evaluate(args):
    preds, _ = read_intervals(args.intervals)
    levels = {p.nominal_level for p in preds.values()}
    if len(levels) != 1:
        raise DataError("interval file mixes nominal levels")
    report = evaluate_model(preds, _dataset(args), levels.pop())
    _emit(args, _report_dict(report))


def cmd_cv(args):
    sample = _dataset(args)
    plan = CvPlan(_specs(args), nominal_level=args.level)
    output = run_cv(sample, plan)
    baseline = args.baseline if args.baseline in output.predictions else None
    summary = summarize_cv(output, sample, baseline=baseline)
    report = summary.to_dict()
    report["separation_audit"] = audit_separation(output, sample)
    report["folds"] = {
        name: [{"held_out_year": y, "theta": f.theta, "train_objective": f.train_objective}
               for y, f in fits]
        for name, fits in output.fits.items()
    }
    _emit(args, report)


def cmd_simulate(args):
    settings = []
    for item in args.settings.split(","):
        try:
            n, t = item.lower().split("x")
            settings.append((int(n), int(t)))
        except ValueError:
            raise UsageError(f"--settings: expected items like 300x20, got {item!r}") from None
    config = SimConfig(replications=args.replications, settings=tuple(settings),
                       rho_values=tuple(_floats(args.rho, "--rho")), tau2=args.tau2,
                       master_seed=args.seed, nominal_level=args.level)
    _emit(args, run_simstudy(config).to_dict())


def cmd_benchmark(args):
    sample = _dataset(args)
    bench = read_benchmark(args.benchmark)
    index = {str(c): i for i, c in enumerate(sample.case_id)}
    unknown = [b.case_id for b in bench if b.case_id not in index]
    if unknown or not bench:
        raise DataError(f"benchmark cases not in the dataset: {unknown[:5]}" if unknown else "empty benchmark file")
    rows = np.array([index[b.case_id] for b in bench])
    if np.any(np.isnan(sample.point_forecast[rows])):
        raise DataError("benchmark comparison needs point forecasts in the dataset")
    # benchmark bounds are on the realization scale; shift to the error scale
    bench_preds = {b.case_id: IntervalForecast(b.lower - sample.point_forecast[i], b.upper - sample.point_forecast[i],
                                               args.level) for b, i in zip(bench, rows)}
    subset = sample.subset(rows)
    output = run_cv(sample, CvPlan(_specs(args), nominal_level=args.level))
    bench_report = evaluate_model(bench_preds, subset, args.level)
    bench_scores = [c.interval_score for c in bench_report.cases]
    models = {}
    for name, preds in output.predictions.items():
        rep = evaluate_model({c: preds[c] for c in bench_preds}, subset, args.level)
        try:
            dm = dm_test([c.interval_score for c in rep.cases], bench_scores, subset.target_year)
            dm_out = {"t_basic": dm.t_basic, "t_clustered": dm.t_clustered, "n_cases": dm.n_cases,
                      "n_clusters": dm.n_clusters, "mean_score_diff": dm.mean_score_diff}
        except DegenerateVarianceError:
            dm_out = "n/a"
        models[name] = {**rep.summary(), "dm_vs_benchmark": dm_out}
    sources = sorted({b.source for b in bench})
    _emit(args, {"benchmark": {"sources": sources, **bench_report.summary()}, "models": models})


def _add_data_args(p, required=True):
    p.add_argument("--data", required=required, help="observation CSV or forecast archive CSV")
    p.add_argument("--outcomes", help="outcomes CSV (target_year,realization) for a forecast archive")
    p.add_argument("--horizon-mode", choices=HORIZON_MODES, default="half")


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path (JSON); stdout if omitted")


def _add_model_args(p):
    p.add_argument("--theta", default="grid", help="'grid' or 'fixed:<value>'")
    p.add_argument("--restarts", type=int, default=5)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fixevent", description="Uncertainty intervals for fixed-event forecasts.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("fit", help="fit one model to a dataset")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--model", default="ar1", choices=MODEL_NAMES)
    p.add_argument("--levels", default=",".join(str(a) for a in DEFAULT_LEVELS))
    _add_common(p)
    p.set_defaults(func=cmd_fit, models=None)

    p = sub.add_parser("predict", help="interval forecasts from a fitted model")
    p.add_argument("--fit", required=True)
    p.add_argument("--horizons")
    _add_data_args(p, required=False)
    p.add_argument("--level", type=float, default=0.8)
    _add_common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score interval forecasts against outcomes")
    p.add_argument("--intervals", required=True)
    _add_data_args(p)
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("cv", help="leave-one-year-out cross-validation report")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--models", default=",".join(MODEL_NAMES))
    p.add_argument("--baseline", default="ar1")
    p.add_argument("--level", type=float, default=0.8)
    _add_common(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("simulate", help="Monte Carlo study on simulated AR(1) errors")
    p.add_argument("--replications", type=int, default=200)
    p.add_argument("--settings", default="300x20,600x40")
    p.add_argument("--rho", default="0.5,0.9")
    p.add_argument("--tau2", type=float, default=0.1)
    p.add_argument("--level", type=float, default=0.8)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("benchmark", help="compare model intervals with external benchmark intervals")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--benchmark", required=True)
    p.add_argument("--models", default=",".join(MODEL_NAMES))
    p.add_argument("--level", type=float, default=0.8)
    _add_common(p)
    p.set_defaults(func=cmd_benchmark)
    return parser


def _exit_code(exc) -> int:
    if isinstance(exc, FoldError):
        cause = exc.__cause__
        return EXIT_NUMERICAL if isinstance(cause, (NumericalError, ArithmeticError)) else EXIT_DATA
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    return EXIT_DATA


def _fail(kind, message, code) -> int:
    line = json.dumps({"error": " ".join(str(message).split()), "kind": kind, "exit_code": code})
    sys.stderr.write(line + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(
                ("fit", "predict", "evaluate", "cv", "simulate", "benchmark")))
        if not 0.0 < getattr(args, "level", 0.8) < 1.0:
            raise UsageError("--level must lie in (0, 1)")
        if getattr(args, "model", None) is not None and args.models is None:
            args.models = args.model
        args.func(args)
    except UsageError as exc:
        return _fail("usage", exc, EXIT_USAGE)
    except FixEventError as exc:
        return _fail(exc.kind, exc, _exit_code(exc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
