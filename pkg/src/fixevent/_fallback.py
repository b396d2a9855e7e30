"""Pure numpy implementations of the kernels in ``_core.pyx``.

Same signatures and return conventions; used when the extension is not
built or ``FIXEVENT_PURE_PYTHON`` is set.
"""

import math

import numpy as np
from scipy.special import ndtr

INV_SQRT_PI = 1.0 / math.sqrt(math.pi)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
ARMIJO = 1e-4


def _crps(mu, sigma, y):
    sigma = np.asarray(sigma, dtype=float)
    y = np.asarray(y, dtype=float)
    pos = sigma > 0
    safe = np.where(pos, sigma, 1.0)
    z = (y - mu) / safe
    val = safe * (z * (2.0 * ndtr(z) - 1.0) + 2.0 * INV_SQRT_2PI * np.exp(-0.5 * z * z) - INV_SQRT_PI)
    return np.where(pos, val, np.abs(y - mu))


def crps_normal_mean(mu, sigma, y):
    return float(np.mean(_crps(mu, sigma, y)))


def ar1_sigma_table(rho, tau, hmax):
    j = np.arange(hmax)
    partial = np.cumsum(rho ** np.arange(12))
    c = np.where(j < 12, partial[np.minimum(j, 11)], rho ** np.maximum(j - 11, 0) * partial[11])
    return np.concatenate(([0.0], tau * np.sqrt(np.cumsum(c * c))))


def ar1_crps_mean(rho, tau, lo, hi, y, hmax):
    table = ar1_sigma_table(rho, tau, hmax)
    return crps_normal_mean(0.0, 0.5 * (table[lo] + table[hi]), y)


def gauss_crps_mean(mu, g0, g1, x, y):
    return crps_normal_mean(mu, g0 + g1 * np.asarray(x), y)


def gauss_crps_terms(mu, g0, g1, x, y):
    x = np.asarray(x, dtype=float)
    sigma = g0 + g1 * x
    z = (np.asarray(y) - mu) / sigma
    cdf = ndtr(z)
    pdf = INV_SQRT_2PI * np.exp(-0.5 * z * z)
    f = np.mean(sigma * (z * (2.0 * cdf - 1.0) + 2.0 * pdf - INV_SQRT_PI))
    dmu = 1.0 - 2.0 * cdf
    dsig = 2.0 * pdf - INV_SQRT_PI
    grad = np.array([dmu.mean(), dsig.mean(), (dsig * x).mean()])
    a = 2.0 * pdf / sigma
    hms = a * z
    hss = a * z * z
    hess = np.array(
        [
            [a.mean(), hms.mean(), (hms * x).mean()],
            [0.0, hss.mean(), (hss * x).mean()],
            [0.0, 0.0, (hss * x * x).mean()],
        ]
    )
    hess[1, 0], hess[2, 0], hess[2, 1] = hess[0, 1], hess[0, 2], hess[1, 2]
    return float(f), grad, hess


def gauss_crps_newton(x, y, mu, g0, g1, g0_min, tol, max_iter):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lb = np.array([-np.inf, g0_min, 0.0])
    v = np.maximum(np.array([mu, g0, g1], dtype=float), lb)
    f, g, H = gauss_crps_terms(*v, x, y)
    it = 0
    while it < max_iter:
        it += 1
        free = ~((v <= lb) & (g > 0))
        if not free.any():
            break
        p = np.zeros(3)
        Hf = H[np.ix_(free, free)]
        gf = g[free]
        ridge, step_f = 0.0, None
        while ridge < 1e3:
            try:
                cand = np.linalg.solve(Hf + ridge * np.eye(len(gf)), -gf)
            except np.linalg.LinAlgError:
                cand = None
            if cand is not None and np.all(np.isfinite(cand)) and -(cand @ gf) > 0:
                step_f = cand
                break
            ridge = 1e-10 if ridge == 0.0 else ridge * 100.0
        p[free] = -gf if step_f is None else step_f
        if -(p @ g) < tol:
            break
        step = 1.0
        while step > 1e-12:
            vn = np.maximum(v + step * p, lb)
            slope = g @ (vn - v)
            fn = gauss_crps_mean(*vn, x, y)
            if fn <= f + ARMIJO * slope:
                break
            step *= 0.5
        if not fn <= f + ARMIJO * slope:
            break
        moved = np.max(np.abs(vn - v))
        scale = max(1.0, np.max(np.abs(v)))
        v = vn
        f, g, H = gauss_crps_terms(*v, x, y)
        if moved <= 1e-13 * scale:
            break
    return float(v[0]), float(v[1]), float(v[2]), float(f), it


def _tick_sum(x, y, alpha, b0, b1):
    u = np.asarray(y) - b0 - b1 * np.asarray(x)
    return float(np.sum(u * (alpha - (u < 0))))


def tick_mean(x, y, alpha, b0, b1):
    return _tick_sum(x, y, alpha, b0, b1) / len(y)


def _wquantile(s, w, target):
    order = np.argsort(s, kind="stable")
    cum = np.cumsum(w[order])
    pos = int(np.searchsorted(cum, target, side="left"))
    return order[min(pos, len(s) - 1)]


def quantile_line(x, y, alpha, b0=0.0, b1=0.0, warm=False):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n == 0:
        raise ValueError("empty sample")
    eps = 1e-10 * (1.0 + np.max(np.abs(y)))
    k = min(n, max(1, math.ceil(n * alpha - 1e-9)))
    q = np.sort(y)[k - 1]
    if x.min() == x.max():
        return float(q), 0.0, _tick_sum(x, y, alpha, q, 0.0) / n, 0, True
    if warm:
        a = int(np.argmin(np.abs(y - b0 - b1 * x)))
        cur = (y[a] - b1 * x[a], b1)
    else:
        a = int(np.flatnonzero(y == q)[0])
        cur = (q, 0.0)
    cur_l = math.inf
    tried = np.zeros(n, dtype=bool)
    stack = [a]
    steps = 0
    while stack and steps < 50 * n:
        a = stack.pop()
        if tried[a]:
            continue
        tried[a] = True
        steps += 1
        dx = x - x[a]
        keep = np.flatnonzero(dx != 0)
        s = (y[keep] - y[a]) / dx[keep]
        w = np.abs(dx[keep])
        target = float(np.sum(np.where(dx[keep] > 0, w * alpha, w * (1.0 - alpha))))
        j = keep[_wquantile(s, w, target)]
        bs = (y[j] - y[a]) / dx[j]
        b0s = y[a] - bs * x[a]
        ls = _tick_sum(x, y, alpha, b0s, bs)
        if cur_l == math.inf or ls < cur_l - 1e-12 * (1.0 + abs(cur_l)):
            cur, cur_l = (b0s, bs), ls
            tried[:] = False
            tried[a] = True
            on_line = np.flatnonzero(np.abs(y - b0s - bs * x) <= eps)
            stack = [int(i) for i in on_line if i != a and i != j] + [int(j)]
    return float(cur[0]), float(cur[1]), cur_l / n, steps, False


def _call(fun, v):
    f = float(fun(np.array(v)))
    return f if math.isfinite(f) else math.inf


def nelder_mead(fun, x0, lb, ub, step, fatol, xatol, maxfev):
    x0 = np.asarray(x0, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    d = len(x0)
    sim = np.empty((d + 1, d))
    sim[0] = np.clip(x0, lb, ub)
    for j in range(d):
        v = sim[0].copy()
        v[j] = sim[0, j] + step[j]
        if v[j] > ub[j]:
            v[j] = sim[0, j] - step[j]
        sim[j + 1] = np.clip(v, lb, ub)
    fs = np.array([_call(fun, v) for v in sim])
    nfev = d + 1
    nit = 0
    while True:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        spread = np.max(np.abs(fs[1:] - fs[0]))
        size = np.max(np.abs(sim[1:] - sim[0]))
        if (spread <= fatol and size <= xatol) or nfev >= maxfev:
            break
        nit += 1
        xbar = sim[:-1].sum(axis=0) / d
        xr = np.clip(2.0 * xbar - sim[-1], lb, ub)
        fr = _call(fun, xr)
        nfev += 1
        shrink = False
        if fr < fs[0]:
            xe = np.clip(3.0 * xbar - 2.0 * sim[-1], lb, ub)
            fe = _call(fun, xe)
            nfev += 1
            sim[-1], fs[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
        else:
            if fr < fs[-1]:
                xc = np.clip(xbar + 0.5 * (xr - xbar), lb, ub)
                fc = _call(fun, xc)
                nfev += 1
                if fc <= fr:
                    sim[-1], fs[-1] = xc, fc
                else:
                    shrink = True
            else:
                xc = np.clip(xbar + 0.5 * (sim[-1] - xbar), lb, ub)
                fc = _call(fun, xc)
                nfev += 1
                if fc < fs[-1]:
                    sim[-1], fs[-1] = xc, fc
                else:
                    shrink = True
            if shrink:
                for j in range(1, d + 1):
                    sim[j] = sim[0] + 0.5 * (sim[j] - sim[0])
                    fs[j] = _call(fun, sim[j])
                    nfev += 1
    return sim[0].copy(), float(fs[0]), nfev, nit
