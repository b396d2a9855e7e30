"""Monte Carlo comparison of interval methods on simulated AR(1) errors.

Each replication simulates one error sample per (sample size, rho) cell,
runs leave-one-year-out cross-validation for the fitted methods and the
true model, and records the mean 80% interval score and coverage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .ar1 import Ar1Params, ErrorSampleDesign, simulate_sample
from .crossval import CvPlan, ModelSpec, run_cv
from .errors import DomainError
from .estimation import FitConfig
from .evaluation import interval_score

METHODS = ("truth", "truth_est", "gauss", "gauss12", "qr", "qr12")
METHOD_LABELS = {
    "truth": "Truth",
    "truth_est": "Truth (estimated)",
    "gauss": "Gauss, theta estimated",
    "gauss12": "Gauss, theta = 12",
    "qr": "QR, theta estimated",
    "qr12": "QR, theta = 12",
}


@dataclass(frozen=True)
class SimConfig:
    replications: int = 200
    settings: tuple = ((300, 20), (600, 40))
    rho_values: tuple = (0.5, 0.9)
    tau2: float = 0.1
    master_seed: int = 0
    nominal_level: float = 0.8

    def __post_init__(self):
        if self.replications < 1:
            raise DomainError("replications must be at least 1")
        if not self.settings:
            raise DomainError("settings must be nonempty")
        object.__setattr__(self, "settings", tuple((int(n), int(t)) for n, t in self.settings))
        object.__setattr__(self, "rho_values", tuple(float(r) for r in self.rho_values))


@dataclass(frozen=True)
class CellResult:
    n: int
    t_max: int
    rho: float
    method: str
    mean_interval_score: float
    mc_se: float
    coverage: float
    replication_means: tuple = field(repr=False, default=())


@dataclass
class SimResult:
    config: SimConfig
    cells: list

    def cell(self, n, t_max, rho, method) -> CellResult:
        for c in self.cells:
            if (c.n, c.t_max, c.rho, c.method) == (n, t_max, rho, method):
                return c
        raise KeyError((n, t_max, rho, method))

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "config": {
                "replications": cfg.replications,
                "settings": [list(s) for s in cfg.settings],
                "rho_values": list(cfg.rho_values),
                "tau2": cfg.tau2,
                "master_seed": cfg.master_seed,
                "nominal_level": cfg.nominal_level,
            },
            "cells": [
                {
                    "n": c.n, "t_max": c.t_max, "rho": c.rho, "method": c.method,
                    "mean_interval_score": c.mean_interval_score, "mc_se": c.mc_se,
                    "coverage": c.coverage, "replication_means": list(c.replication_means),
                }
                for c in self.cells
            ],
        }


def replication_seed(master_seed: int, setting_index: int, replication: int) -> list:
    """Seed entropy for one replication; shared across rho values."""
    return [int(master_seed), int(setting_index), int(replication)]


def run_replication(params: Ar1Params, n: int, t_max: int, seed, nominal_level: float = 0.8,
                    replication=None) -> dict:
    """Mean interval score and coverage per method for one simulated sample."""
    sample = simulate_sample(params, ErrorSampleDesign(n=n, t_max=t_max, seed=seed))
    fit_seed = int(np.random.SeedSequence(seed).generate_state(1)[0])
    config = FitConfig(seed=fit_seed)
    specs = (
        ModelSpec("truth", "truth", truth=params),
        ModelSpec("truth_est", "ar1", config=config),
        ModelSpec.named("gauss", config),
        ModelSpec.named("gauss12", config),
        ModelSpec.named("qr", config),
        ModelSpec.named("qr12", config),
    )
    output = run_cv(sample, CvPlan(specs, nominal_level=nominal_level), replication=replication)
    ids = [str(c) for c in sample.case_id]
    out = {}
    for name, preds in output.predictions.items():
        lower = np.array([preds[c].lower for c in ids])
        upper = np.array([preds[c].upper for c in ids])
        scores = interval_score(lower, upper, sample.error, nominal_level)
        covered = (lower <= sample.error) & (sample.error <= upper)
        out[name] = (math.fsum(scores) / len(ids), float(np.mean(covered)))
    return out


def run_simstudy(config: SimConfig = SimConfig(),
                 progress: Optional[Callable[[int, int], None]] = None) -> SimResult:
    """Run all replications for every (setting, rho) cell.

    Replication ``r`` of setting ``s`` draws from the seed
    ``(master_seed, s, r)`` for every rho, so the rho cells share random
    numbers.
    """
    total = len(config.settings) * len(config.rho_values) * config.replications
    done = 0
    cells = []
    for s_idx, (n, t_max) in enumerate(config.settings):
        for rho in config.rho_values:
            params = Ar1Params(rho, config.tau2)
            means = {m: [] for m in METHODS}
            cover = {m: [] for m in METHODS}
            for r in range(config.replications):
                res = run_replication(params, n, t_max, replication_seed(config.master_seed, s_idx, r),
                                      config.nominal_level, replication=r)
                for m in METHODS:
                    means[m].append(res[m][0])
                    cover[m].append(res[m][1])
                done += 1
                if progress is not None:
                    progress(done, total)
            for m in METHODS:
                vals = np.asarray(means[m])
                se = float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else float("nan")
                cells.append(CellResult(n, t_max, rho, m, math.fsum(vals) / len(vals), se,
                                        float(np.mean(cover[m])), tuple(float(v) for v in vals)))
    return SimResult(config, cells)
