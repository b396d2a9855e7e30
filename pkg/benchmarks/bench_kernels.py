"""Time the compiled and pure-Python kernel backends side by side.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Each kernel is timed on the same inputs under both backends; the last
rows time one full cross-validation run of every model on the bundled
German archive in a fresh interpreter per backend.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from fixevent import kernels

CV_SCRIPT = """
import time
from fixevent.crossval import CvPlan, ModelSpec, run_cv
from fixevent.dataio import bundled_path, load_dataset
from fixevent.kernels import BACKEND
s = load_dataset(bundled_path("german_forecasts.csv"), bundled_path("german_outcomes.csv"))
plan = CvPlan(tuple(ModelSpec.named(n) for n in ("ar1", "gauss", "gauss12", "qr", "qr12")))
t = time.perf_counter()
run_cv(s, plan)
print(BACKEND, time.perf_counter() - t)
"""


def cases(rng):
    n = 600
    h = rng.integers(1, 49, n) / 2
    x = np.ascontiguousarray(np.minimum(h, 12.0))
    y = rng.normal(0, 0.3 + 0.1 * x)
    lo = np.ascontiguousarray(np.floor(h), dtype=np.intp)
    hi = np.ascontiguousarray(np.ceil(h), dtype=np.intp)
    rosen = lambda v: (1 - v[0]) ** 2 + 100 * (v[1] - v[0] ** 2) ** 2
    return {
        "ar1_crps_mean (n=600)": lambda k: k.ar1_crps_mean(0.5, 0.3, lo, hi, y, 24),
        "gauss_crps_newton (n=600)": lambda k: k.gauss_crps_newton(x, y, 0.0, 0.5, 0.05, 1e-6, 1e-12, 100),
        "quantile_line cold (n=600)": lambda k: k.quantile_line(x, y, 0.1),
        "tick_mean (n=600)": lambda k: k.tick_mean(x, y, 0.1, -0.5, -0.1),
        "nelder_mead rosenbrock": lambda k: k.nelder_mead(rosen, np.array([-1.0, 1.0]), np.full(2, -5.0),
                                                          np.full(2, 5.0), np.full(2, 0.3), 1e-12, 1e-8, 4000),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    backends = kernels.available_backends()
    names = sorted(backends)
    print(f"{'kernel':32s}" + "".join(f"{n + ' (ms)':>16s}" for n in names) + f"{'speedup':>10s}")
    for label, call in cases(np.random.default_rng(0)).items():
        ms = {}
        for name in names:
            mod = backends[name]
            number = max(1, int(0.2 / max(timeit.timeit(lambda: call(mod), number=1), 1e-6)))
            best = min(timeit.repeat(lambda: call(mod), number=number, repeat=args.repeat))
            ms[name] = 1e3 * best / number
        speed = ms["python"] / ms["compiled"] if "compiled" in ms else float("nan")
        print(f"{label:32s}" + "".join(f"{ms[n]:16.3f}" for n in names) + f"{speed:10.1f}")
    print()
    for pure in ("1", "0"):
        env = dict(os.environ, FIXEVENT_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", CV_SCRIPT], env=env, capture_output=True, text=True, check=True)
        backend, seconds = out.stdout.split()
        print(f"German CV, all models, {backend:9s} backend: {float(seconds):.2f} s")


if __name__ == "__main__":
    main()
