"""Acceptance criteria, one test each.

Every test appends one PASS/FAIL line to the terminal summary before
asserting, so a full run lists the outcome of each criterion.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy import integrate
from scipy.stats import norm

from conftest import ACCEPTANCE_LINES
from fixevent.ar1 import Ar1Params, analytic_error_covariance, direct_forecast_errors, sigma_h, simulate_paths
from fixevent.crossval import CvPlan, ModelSpec, audit_separation, run_cv
from fixevent.dataio import bundled_path, load_dataset
from fixevent.estimation import FitConfig, fit_qr
from fixevent.evaluation import dm_test, interval_score
from fixevent.models import crps_gaussian, tick_loss
from fixevent.records import ErrorSample
from fixevent.simstudy import METHODS, SimConfig, run_simstudy

TAU2 = 0.1


def record(name, ok, detail):
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_sigma_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    exact = True
    for rho in (0.0, 0.5, 0.9):
        params = Ar1Params(rho, TAU2)
        _, values = simulate_paths(params, 36, rng, n_paths=100_000)
        for h in range(1, 25):
            sd = float(np.std(direct_forecast_errors(values, rho, 1, h), ddof=1))
            worst = max(worst, abs(sd / sigma_h(params, h) - 1))
            if rho == 0.0:
                exact &= math.isclose(sigma_h(params, h), math.sqrt(TAU2 * min(h, 12)), rel_tol=4e-16)
    elapsed = time.perf_counter() - start
    record("sigma oracle", worst < 0.01 and exact and elapsed < 30,
           f"max rel dev {worst:.4f} (<0.01), rho=0 exact {exact}, {elapsed:.1f}s (<30s)")


def test_covariance_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(202)
    n_paths = 100_000
    tuples = []
    for rho in (0.5, 0.9):
        for k in range(10):
            t1 = int(rng.integers(1, 3))
            t2 = t1 + int(rng.random() < 0.25)
            h1, h2 = (int(v) for v in rng.integers(1, 25, 2))
            if k < 2:
                h2 = int(rng.integers(1, 13))
                t2 = t1 + 1  # non-overlapping: 12 (t2 - t1) >= h2
            tuples.append((rho, t1, h1, t2, h2))
    worst_z = 0.0
    zeros_exact = True
    n_zero = 0
    paths = {rho: simulate_paths(Ar1Params(rho, TAU2), 24 + 36, rng, n_paths=n_paths)[1] for rho in (0.5, 0.9)}
    for rho, t1, h1, t2, h2 in tuples:
        e1 = direct_forecast_errors(paths[rho], rho, t1, h1)
        e2 = direct_forecast_errors(paths[rho], rho, t2, h2)
        prod = (e1 - e1.mean()) * (e2 - e2.mean())
        emp, se = prod.mean(), prod.std(ddof=1) / math.sqrt(n_paths)
        ana = analytic_error_covariance(rho, TAU2, t1, h1, t2, h2)
        worst_z = max(worst_z, abs(emp - ana) / se)
        if 12 * (t2 - t1) >= h2:
            n_zero += 1
            zeros_exact &= ana == 0.0
    elapsed = time.perf_counter() - start
    record("covariance oracle", worst_z < 3 and zeros_exact and n_zero > 0 and elapsed < 60,
           f"max |z| {worst_z:.2f} (<3) over {len(tuples)} tuples, {n_zero} exact zeros {zeros_exact}, "
           f"{elapsed:.1f}s (<60s)")


def crps_by_quantile_integral(mu, sigma, y):
    f = lambda a: 2.0 * tick_loss(a, norm.ppf(a, mu, sigma), y)
    return integrate.quad(f, 0.0, 1.0, limit=400, epsabs=1e-12, epsrel=1e-12)[0]


def test_crps_identity():
    worst = 0.0
    for mu in np.linspace(-2, 2, 5):
        for sigma in (0.2, 0.5, 1.0, 2.0, 4.0):
            for y in np.linspace(-3, 3, 5):
                worst = max(worst, abs(crps_gaussian(mu, sigma, y) - crps_by_quantile_integral(mu, sigma, y)))
    at_zero = crps_by_quantile_integral(0.0, 1.0, 0.0)
    ok = worst < 1e-6 and abs(crps_gaussian(0, 1, 0) - 0.23370) < 1e-4 and abs(at_zero - 0.23370) < 1e-4
    record("CRPS identity", ok, f"max |diff| {worst:.2e} (<1e-6) on 125 points, crps(0,1,0)={crps_gaussian(0, 1, 0):.5f}")


def test_interval_score_decomposition():
    rng = np.random.default_rng(303)
    lo = rng.normal(0, 1, 1000)
    hi = lo + rng.exponential(1, 1000)
    y = rng.normal(0, 1.5, 1000)
    base = np.max(np.abs(interval_score(lo, hi, y, 0.8) - 10 * (tick_loss(0.1, lo, y) + tick_loss(0.9, hi, y))))
    general = 0.0
    for level in (0.5, 0.9):
        a = (1 - level) / 2
        expected = 2 / (1 - level) * (tick_loss(a, lo, y) + tick_loss(1 - a, hi, y))
        general = max(general, np.max(np.abs(interval_score(lo, hi, y, level) - expected) / (1 + np.abs(expected))))
    record("interval-score decomposition", base < 1e-12 and general < 1e-12,
           f"level 0.8 max diff {base:.1e}, levels 0.5/0.9 max rel diff {general:.1e} (<1e-12)")


def _brute_force(x, y, alpha):
    best = math.inf
    for i in range(len(y)):
        for j in range(i + 1, len(y)):
            if x[i] != x[j]:
                b1 = (y[j] - y[i]) / (x[j] - x[i])
                best = min(best, float(np.mean(tick_loss(alpha, y[i] + b1 * (x - x[i]), y))))
    return best


def test_qr_exactness():
    rng = np.random.default_rng(404)
    levels = (0.1, 0.9)
    worst = 0.0
    done = 0
    while done < 100:
        n = int(rng.integers(3, 9))
        h = rng.integers(1, 25, n).astype(float)
        if np.ptp(np.minimum(h, 12)) == 0:
            continue
        sample = ErrorSample([f"c{i}" for i in range(n)], [2000] * n, h, np.round(rng.normal(0, 1, n), 2))
        fit = fit_qr(sample, FitConfig.fixed(12.0), levels)
        x = np.minimum(h, 12.0)
        brute = sum(_brute_force(x, sample.error, a) for a in levels)
        worst = max(worst, abs(fit.train_objective - brute))
        done += 1
    quantiles_ok = True
    for _ in range(20):
        n = int(rng.integers(3, 9))
        y = np.round(rng.normal(0, 1, n), 2)
        sample = ErrorSample([f"c{i}" for i in range(n)], [2000] * n, rng.integers(12, 25, n).astype(float), y)
        fit = fit_qr(sample, FitConfig.fixed(12.0), levels)
        for k, a in enumerate(levels):
            b0, b1 = fit.params.coeffs[k]
            quantiles_ok &= b1 == 0.0 and b0 + 12.0 * b1 == np.quantile(y, a, method="inverted_cdf")
    record("QR exactness", worst < 1e-9 and quantiles_ok,
           f"max |objective - brute force| {worst:.1e} (<1e-9) on 100 instances, "
           f"intercept-only = empirical quantile {quantiles_ok}")


@pytest.fixture(scope="session")
def simstudy():
    start = time.perf_counter()
    result = run_simstudy(SimConfig(replications=200, settings=((300, 20), (600, 40)), rho_values=(0.5, 0.9),
                                    tau2=TAU2, master_seed=0))
    return result, time.perf_counter() - start


@pytest.mark.slow
def test_simulation_study(simstudy):
    res, elapsed = simstudy
    fitted = [m for m in METHODS if m != "truth"]
    failures = []
    for n, t_max in res.config.settings:
        for rho in res.config.rho_values:
            truth = res.cell(n, t_max, rho, "truth")
            for m in fitted:
                other = res.cell(n, t_max, rho, m)
                diff = np.subtract(truth.replication_means, other.replication_means)
                se = np.std(diff, ddof=1) / math.sqrt(len(diff))
                if diff.mean() > 2 * se:
                    failures.append(f"(a) {m} beats truth at n={n}, rho={rho}")
    for rho in res.config.rho_values:
        for m in fitted:
            small, large = (res.cell(n, t, rho, m).mean_interval_score for n, t in res.config.settings)
            if not large < small:
                failures.append(f"(b) {m} at rho={rho}: {small:.3f} -> {large:.3f}")
        a, b = (res.cell(n, t, rho, "truth") for n, t in res.config.settings)
        if abs(a.mean_interval_score - b.mean_interval_score) > 2 * math.hypot(a.mc_se, b.mc_se):
            failures.append(f"(d) truth differs across sizes at rho={rho}")
    for n, t_max in res.config.settings:
        for m in METHODS:
            low, high = (res.cell(n, t_max, rho, m).mean_interval_score for rho in (0.5, 0.9))
            if not high > low:
                failures.append(f"(c) {m} at n={n}: rho 0.9 {high:.3f} <= rho 0.5 {low:.3f}")
    coverage = float(np.mean([c.coverage for c in res.cells if c.method == "truth"]))
    if abs(coverage - 0.8) > 0.03:
        failures.append(f"(e) truth coverage {coverage:.3f}")
    if elapsed > 15 * 60:
        failures.append(f"runtime {elapsed:.0f}s")
    record("simulation study", not failures,
           f"checks (a)-(e) {'hold' if not failures else failures}, truth coverage {coverage:.3f}, {elapsed:.0f}s (<900s)")


def test_cv_separation_audit():
    plan = CvPlan(tuple(ModelSpec.named(n) for n in ("ar1", "gauss", "gauss12", "qr", "qr12")))
    details, ok = [], True
    for name, years in (("german", 20), ("us", 40)):
        sample = load_dataset(bundled_path(f"{name}_forecasts.csv"), bundled_path(f"{name}_outcomes.csv"))
        out = run_cv(sample, plan)
        passed = audit_separation(out, sample)
        ok &= passed and out.n_iterations == years
        details.append(f"{name} {out.n_iterations} iterations (expected {years}), audit {passed}")
    record("CV separation audit", ok, "; ".join(details))


def test_optimality_sanity():
    n_rep = 10_000
    rng = np.random.default_rng(505)
    bound = 3 / math.sqrt(n_rep)
    pairs = [(1, 24, 2, 12), (1, 12, 2, 6), (1, 6, 2, 1), (1, 18, 3, 24), (2, 3, 3, 9), (1, 1, 2, 12)]
    worst = 0.0
    for rho in (0.5, 0.9):
        _, values = simulate_paths(Ar1Params(rho, TAU2), 24 + 36, rng, n_paths=n_rep)
        for t1, h1, t2, h2 in pairs:
            assert 12 * (t2 - t1) >= h2
            r = np.corrcoef(direct_forecast_errors(values, rho, t1, h1), direct_forecast_errors(values, rho, t2, h2))[0, 1]
            worst = max(worst, abs(r))
    record("optimality sanity", worst < bound,
           f"max |corr| {worst:.4f} (<{bound:.3f}) over {2 * len(pairs)} non-overlapping pairs, N={n_rep}")


def test_dm_properties():
    rng = np.random.default_rng(606)
    anti = single = True
    for _ in range(200):
        n = int(rng.integers(5, 60))
        a, b = rng.exponential(1, n), rng.exponential(1, n)
        years = rng.integers(0, 8, n)
        ab, ba = dm_test(a, b, years), dm_test(b, a, years)
        anti &= ab.t_basic == -ba.t_basic and ab.t_clustered == -ba.t_clustered
        one = dm_test(a, b, np.arange(n))
        single &= one.t_basic == one.t_clustered
    rejections = np.zeros(2)
    for _ in range(1000):
        d = rng.normal(0, 1, 200)
        res = dm_test(d, np.zeros(200), np.repeat(np.arange(40), 5))
        rejections += np.abs([res.t_basic, res.t_clustered]) > 1.96
    size = rejections / 1000
    ok = anti and single and bool(np.all((size >= 0.02) & (size <= 0.09)))
    record("DM test properties", ok,
           f"antisymmetry exact {anti}, one-case-per-cluster equal {single}, "
           f"size basic {size[0]:.3f} clustered {size[1]:.3f} (in [0.02, 0.09])")


def _cli(args, out):
    subprocess.run([sys.executable, "-m", "fixevent.cli", *args, "--out", str(out)], check=True)
    return out.read_bytes()


def test_determinism(tmp_path):
    data = ["--data", str(bundled_path("german_forecasts.csv")), "--outcomes", str(bundled_path("german_outcomes.csv"))]
    cv = ["cv", "--seed", "11"] + data
    sim = ["simulate", "--replications", "3", "--settings", "150x10", "--seed", "11"]
    same_cv = _cli(cv, tmp_path / "cv1.json") == _cli(cv, tmp_path / "cv2.json")
    same_sim = _cli(sim, tmp_path / "s1.json") == _cli(sim, tmp_path / "s2.json")
    json.loads((tmp_path / "cv1.json").read_text())
    record("determinism", same_cv and same_sim, f"cv byte-identical {same_cv}, simulate byte-identical {same_sim}")
