# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the inner loops of estimation.

Every function here has a numpy twin in :mod:`fixevent._fallback` with the
same signature; :mod:`fixevent.kernels` picks one at import time.
"""

import numpy as np

from libc.math cimport erfc, exp, sqrt, fabs, pow, INFINITY, isfinite
from libc.stdlib cimport malloc, free

cdef double SQRT2 = 1.4142135623730951
cdef double INV_SQRT_PI = 0.5641895835477563
cdef double INV_SQRT_2PI = 0.3989422804014327
cdef double ARMIJO = 1e-4


cdef inline double _crps(double mu, double sigma, double y) noexcept nogil:
    cdef double z, cdf, pdf
    if sigma <= 0.0:
        return fabs(y - mu)
    z = (y - mu) / sigma
    cdf = 0.5 * erfc(-z / SQRT2)
    pdf = INV_SQRT_2PI * exp(-0.5 * z * z)
    return sigma * (z * (2.0 * cdf - 1.0) + 2.0 * pdf - INV_SQRT_PI)


def crps_normal_mean(double mu, const double[::1] sigma, const double[::1] y):
    """Mean Gaussian CRPS of outcomes ``y`` under N(mu, sigma_i^2)."""
    cdef Py_ssize_t i, n = y.shape[0]
    cdef double acc = 0.0
    with nogil:
        for i in range(n):
            acc += _crps(mu, sigma[i], y[i])
    return acc / n


cdef void _ar1_sigma_table(double rho, double tau, Py_ssize_t hmax, double* out) noexcept nogil:
    # sigma(h) = tau * sqrt(sum_{j<h} c_j^2), c_j = rho^max(0, j-11) * S(min(j, 11))
    cdef double s = 0.0, c, acc = 0.0, partial[12]
    cdef Py_ssize_t j
    for j in range(12):
        s = 1.0 + rho * s
        partial[j] = s
    out[0] = 0.0
    for j in range(hmax):
        if j < 12:
            c = partial[j]
        else:
            c = pow(rho, <double>(j - 11)) * partial[11]
        acc += c * c
        out[j + 1] = tau * sqrt(acc)


def ar1_sigma_table(double rho, double tau, Py_ssize_t hmax):
    out = np.empty(hmax + 1)
    cdef double[::1] view = out
    _ar1_sigma_table(rho, tau, hmax, &view[0])
    return out


def ar1_crps_mean(double rho, double tau, const Py_ssize_t[::1] lo,
                  const Py_ssize_t[::1] hi, const double[::1] y, Py_ssize_t hmax):
    """Mean CRPS of the zero-mean AR(1) model on half-month horizons.

    ``lo``/``hi`` are floor/ceil of each horizon; sigma is their average.
    """
    cdef Py_ssize_t i, n = y.shape[0]
    cdef double acc = 0.0
    cdef double* table = <double*> malloc((hmax + 1) * sizeof(double))
    if table == NULL:
        raise MemoryError()
    with nogil:
        _ar1_sigma_table(rho, tau, hmax, table)
        for i in range(n):
            acc += _crps(0.0, 0.5 * (table[lo[i]] + table[hi[i]]), y[i])
    free(table)
    return acc / n


cdef double _gauss_value(double mu, double g0, double g1, const double[::1] x,
                         const double[::1] y) noexcept nogil:
    cdef Py_ssize_t i, n = y.shape[0]
    cdef double acc = 0.0
    for i in range(n):
        acc += _crps(mu, g0 + g1 * x[i], y[i])
    return acc / n


cdef double _gauss_terms(double mu, double g0, double g1, const double[::1] x,
                         const double[::1] y, double* g, double* H) noexcept nogil:
    cdef Py_ssize_t i, k, n = y.shape[0]
    cdef double acc = 0.0, sigma, z, cdf, pdf, a, dmu, dsig, hmm, hms, hss, xi
    for k in range(3):
        g[k] = 0.0
    for k in range(9):
        H[k] = 0.0
    for i in range(n):
        xi = x[i]
        sigma = g0 + g1 * xi
        z = (y[i] - mu) / sigma
        cdf = 0.5 * erfc(-z / SQRT2)
        pdf = INV_SQRT_2PI * exp(-0.5 * z * z)
        acc += sigma * (z * (2.0 * cdf - 1.0) + 2.0 * pdf - INV_SQRT_PI)
        dmu = 1.0 - 2.0 * cdf
        dsig = 2.0 * pdf - INV_SQRT_PI
        a = 2.0 * pdf / sigma
        hmm = a
        hms = a * z
        hss = a * z * z
        g[0] += dmu
        g[1] += dsig
        g[2] += dsig * xi
        H[0] += hmm
        H[1] += hms
        H[2] += hms * xi
        H[4] += hss
        H[5] += hss * xi
        H[8] += hss * xi * xi
    for k in range(3):
        g[k] /= n
    for k in range(9):
        H[k] /= n
    H[3] = H[1]
    H[6] = H[2]
    H[7] = H[5]
    return acc / n


def gauss_crps_mean(double mu, double g0, double g1, const double[::1] x, const double[::1] y):
    return _gauss_value(mu, g0, g1, x, y)


def gauss_crps_terms(double mu, double g0, double g1, const double[::1] x, const double[::1] y):
    """Mean CRPS with gradient and Hessian in (mu, gamma0, gamma1)."""
    grad = np.empty(3)
    hess = np.empty((3, 3))
    cdef double[::1] gv = grad
    cdef double[:, ::1] hv = hess
    f = _gauss_terms(mu, g0, g1, x, y, &gv[0], &hv[0, 0])
    return f, grad, hess


cdef int _solve_small(double* A, double* b, int m) noexcept nogil:
    # Gaussian elimination with partial pivoting, in place; solution in b.
    cdef int i, j, k, p
    cdef double t, piv
    for k in range(m):
        p = k
        for i in range(k + 1, m):
            if fabs(A[i * m + k]) > fabs(A[p * m + k]):
                p = i
        if fabs(A[p * m + k]) < 1e-300:
            return -1
        if p != k:
            for j in range(m):
                t = A[k * m + j]; A[k * m + j] = A[p * m + j]; A[p * m + j] = t
            t = b[k]; b[k] = b[p]; b[p] = t
        piv = A[k * m + k]
        for i in range(k + 1, m):
            t = A[i * m + k] / piv
            for j in range(k, m):
                A[i * m + j] -= t * A[k * m + j]
            b[i] -= t * b[k]
    for k in range(m - 1, -1, -1):
        t = b[k]
        for j in range(k + 1, m):
            t -= A[k * m + j] * b[j]
        b[k] = t / A[k * m + k]
    return 0


def gauss_crps_newton(const double[::1] x, const double[::1] y, double mu, double g0,
                      double g1, double g0_min, double tol, int max_iter):
    """Projected Newton for the convex mean-CRPS objective of the Gaussian model.

    Bounds: gamma0 >= g0_min, gamma1 >= 0.  Returns
    ``(mu, gamma0, gamma1, objective, iterations)``.
    """
    cdef double v[3], lb[3], vn[3], g[3], H[9], A[9], p[3], rhs[3]
    cdef int free_idx[3]
    cdef int it, k, r, c, m, ok
    cdef double f, fn, step, dec, slope, scale, ridge, moved
    v[0] = mu; v[1] = g0; v[2] = g1
    lb[0] = -INFINITY; lb[1] = g0_min; lb[2] = 0.0
    for k in range(3):
        if v[k] < lb[k]:
            v[k] = lb[k]
    it = 0
    with nogil:
        f = _gauss_terms(v[0], v[1], v[2], x, y, g, H)
        while it < max_iter:
            it += 1
            m = 0
            for k in range(3):
                p[k] = 0.0
                if not (v[k] <= lb[k] and g[k] > 0.0):
                    free_idx[m] = k
                    m += 1
            if m == 0:
                break
            ridge = 0.0
            ok = -1
            while ok != 0 and ridge < 1e3:
                for r in range(m):
                    rhs[r] = -g[free_idx[r]]
                    for c in range(m):
                        A[r * m + c] = H[free_idx[r] * 3 + free_idx[c]]
                    A[r * m + r] += ridge
                ok = _solve_small(A, rhs, m)
                if ok == 0:
                    dec = 0.0
                    for r in range(m):
                        dec -= rhs[r] * g[free_idx[r]]
                    if not (dec > 0.0) or not isfinite(dec):
                        ok = -1
                if ok != 0:
                    ridge = 1e-10 if ridge == 0.0 else ridge * 100.0
            if ok != 0:
                for r in range(m):
                    rhs[r] = -g[free_idx[r]]
            for r in range(m):
                p[free_idx[r]] = rhs[r]
            dec = 0.0
            for k in range(3):
                dec -= p[k] * g[k]
            if dec < tol:
                break
            step = 1.0
            fn = f
            while step > 1e-12:
                slope = 0.0
                for k in range(3):
                    vn[k] = v[k] + step * p[k]
                    if vn[k] < lb[k]:
                        vn[k] = lb[k]
                    slope += g[k] * (vn[k] - v[k])
                fn = _gauss_value(vn[0], vn[1], vn[2], x, y)
                if fn <= f + ARMIJO * slope:
                    break
                step *= 0.5
            if not (fn <= f + ARMIJO * slope):
                break
            moved = 0.0
            scale = 1.0
            for k in range(3):
                moved = max(moved, fabs(vn[k] - v[k]))
                scale = max(scale, fabs(v[k]))
                v[k] = vn[k]
            f = _gauss_terms(v[0], v[1], v[2], x, y, g, H)
            if moved <= 1e-13 * scale:
                break
    return v[0], v[1], v[2], f, it


cdef inline double _tick(double u, double alpha) noexcept nogil:
    return u * (alpha - 1.0) if u < 0.0 else u * alpha


cdef double _tick_sum(const double[::1] x, const double[::1] y, double alpha,
                      double b0, double b1) noexcept nogil:
    cdef Py_ssize_t i, n = y.shape[0]
    cdef double acc = 0.0
    for i in range(n):
        acc += _tick(y[i] - b0 - b1 * x[i], alpha)
    return acc


def tick_mean(const double[::1] x, const double[::1] y, double alpha, double b0, double b1):
    return _tick_sum(x, y, alpha, b0, b1) / y.shape[0]


cdef inline void _swap(double* s, double* w, Py_ssize_t* ix, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    cdef double t
    cdef Py_ssize_t ti
    t = s[a]; s[a] = s[b]; s[b] = t
    t = w[a]; w[a] = w[b]; w[b] = t
    ti = ix[a]; ix[a] = ix[b]; ix[b] = ti


cdef Py_ssize_t _wselect(double* s, double* w, Py_ssize_t* ix, Py_ssize_t m, double target) noexcept nogil:
    # Position holding the smallest s whose cumulative (ascending) weight reaches target.
    cdef Py_ssize_t lo = 0, hi = m, lt, gt, i
    cdef double pivot, a, b, c, wl, we
    while hi - lo > 1:
        a = s[lo]; b = s[(lo + hi) // 2]; c = s[hi - 1]
        if a < b:
            pivot = b if b < c else (c if a < c else a)
        else:
            pivot = a if a < c else (c if b < c else b)
        lt = lo; i = lo; gt = hi
        while i < gt:
            if s[i] < pivot:
                _swap(s, w, ix, i, lt)
                lt += 1
                i += 1
            elif s[i] > pivot:
                gt -= 1
                _swap(s, w, ix, i, gt)
            else:
                i += 1
        wl = 0.0
        for i in range(lo, lt):
            wl += w[i]
        we = 0.0
        for i in range(lt, gt):
            we += w[i]
        if lt > lo and wl >= target:
            hi = lt
        elif wl + we >= target or gt >= hi:
            return lt
        else:
            target -= wl + we
            lo = gt
    return lo


def quantile_line(const double[::1] x, const double[::1] y, double alpha,
                  double b0=0.0, double b1=0.0, bint warm=False):
    """Exact minimizer of sum tick(alpha, b0 + b1*x_i, y_i).

    Vertex descent over lines through pairs of observations: fix one
    observation on the line, choose the optimal slope (a weighted quantile
    of pairwise slopes), and pivot.  Terminates when rotating about every
    observation on the current line fails to improve, which certifies
    optimality of the convex piecewise-linear objective.

    Returns ``(b0, b1, mean_loss, steps, degenerate)``; ``degenerate`` is
    set when all regressor values coincide and the slope is fixed at 0.
    """
    cdef Py_ssize_t n = y.shape[0], i, j, k, a, pos, m, top, steps = 0
    cdef double xmin, xmax, dx, target, bs, b0s, ls, cur_b0, cur_b1, cur_l, best, r, eps, ymax
    if n == 0:
        raise ValueError("empty sample")
    cdef double* s = <double*> malloc(n * sizeof(double))
    cdef double* w = <double*> malloc(n * sizeof(double))
    cdef Py_ssize_t* ix = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    cdef Py_ssize_t* stack = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    cdef char* tried = <char*> malloc(n * sizeof(char))
    if s == NULL or w == NULL or ix == NULL or stack == NULL or tried == NULL:
        free(s); free(w); free(ix); free(stack); free(tried)
        raise MemoryError()
    xmin = x[0]; xmax = x[0]; ymax = 0.0
    for i in range(n):
        xmin = min(xmin, x[i]); xmax = max(xmax, x[i]); ymax = max(ymax, fabs(y[i]))
    eps = 1e-10 * (1.0 + ymax)

    # type-1 empirical quantile of y (unit weights, count target k - 1/2)
    for i in range(n):
        s[i] = y[i]; w[i] = 1.0; ix[i] = i
    k = <Py_ssize_t> (n * alpha - 1e-9)
    if k < n * alpha - 1e-9:
        k += 1
    k = max(1, min(n, k))
    pos = _wselect(s, w, ix, n, k - 0.5)
    if xmin == xmax:
        cur_b0 = s[pos]
        cur_l = _tick_sum(x, y, alpha, cur_b0, 0.0)
        free(s); free(w); free(ix); free(stack); free(tried)
        return cur_b0, 0.0, cur_l / n, 0, True

    if warm:
        a = 0
        best = INFINITY
        for i in range(n):
            r = fabs(y[i] - b0 - b1 * x[i])
            if r < best:
                best = r
                a = i
        cur_b1 = b1
    else:
        a = ix[pos]
        cur_b1 = 0.0
    cur_b0 = y[a] - cur_b1 * x[a]
    cur_l = INFINITY
    for i in range(n):
        tried[i] = 0
    stack[0] = a
    top = 1

    with nogil:
        while top > 0 and steps < 50 * n:
            top -= 1
            a = stack[top]
            if tried[a]:
                continue
            tried[a] = 1
            steps += 1
            m = 0
            target = 0.0
            for j in range(n):
                dx = x[j] - x[a]
                if dx == 0.0:
                    continue
                s[m] = (y[j] - y[a]) / dx
                ix[m] = j
                if dx > 0.0:
                    w[m] = dx
                    target += dx * alpha
                else:
                    w[m] = -dx
                    target += -dx * (1.0 - alpha)
                m += 1
            pos = _wselect(s, w, ix, m, target)
            bs = s[pos]
            b0s = y[a] - bs * x[a]
            ls = _tick_sum(x, y, alpha, b0s, bs)
            if cur_l == INFINITY or ls < cur_l - 1e-12 * (1.0 + fabs(cur_l)):
                cur_b0 = b0s
                cur_b1 = bs
                cur_l = ls
                for i in range(n):
                    tried[i] = 0
                tried[a] = 1
                top = 0
                for i in range(n):
                    if i != ix[pos] and i != a and fabs(y[i] - cur_b0 - cur_b1 * x[i]) <= eps:
                        stack[top] = i
                        top += 1
                stack[top] = ix[pos]
                top += 1
    free(s); free(w); free(ix); free(stack); free(tried)
    return cur_b0, cur_b1, cur_l / n, steps, False


cdef inline void _clip(double[::1] v, const double[::1] lb, const double[::1] ub) noexcept nogil:
    cdef Py_ssize_t k
    for k in range(v.shape[0]):
        if v[k] < lb[k]:
            v[k] = lb[k]
        elif v[k] > ub[k]:
            v[k] = ub[k]


cdef double _call(object fun, double[::1] v):
    cdef double f = fun(np.array(v))
    return f if isfinite(f) else INFINITY


def nelder_mead(fun, const double[::1] x0, const double[::1] lb, const double[::1] ub,
                const double[::1] step, double fatol, double xatol, Py_ssize_t maxfev):
    """Box-projected Nelder-Mead (standard coefficients 1, 2, 1/2, 1/2).

    Trial points are projected onto the box before evaluation.  Returns
    ``(x, f, nfev, nit)``.
    """
    cdef Py_ssize_t d = x0.shape[0], i, j, k, nfev = 0, nit = 0
    sim_arr = np.empty((d + 1, d))
    fs_arr = np.empty(d + 1)
    cdef double[:, ::1] sim = sim_arr
    cdef double[::1] fs = fs_arr
    cdef double[::1] xbar = np.empty(d), xr = np.empty(d), xe = np.empty(d), xc = np.empty(d)
    cdef double[::1] tmp = np.empty(d)
    cdef double fr, fe, fc, ft, spread, size
    cdef bint shrink

    for k in range(d):
        sim[0, k] = x0[k]
    _clip(sim[0], lb, ub)
    for j in range(d):
        for k in range(d):
            sim[j + 1, k] = sim[0, k]
        sim[j + 1, j] = sim[0, j] + step[j]
        if sim[j + 1, j] > ub[j]:
            sim[j + 1, j] = sim[0, j] - step[j]
        _clip(sim[j + 1], lb, ub)
    for j in range(d + 1):
        fs[j] = _call(fun, sim[j])
        nfev += 1

    while True:
        # insertion sort of vertices by objective (stable)
        for i in range(1, d + 1):
            ft = fs[i]
            for k in range(d):
                tmp[k] = sim[i, k]
            j = i - 1
            while j >= 0 and fs[j] > ft:
                fs[j + 1] = fs[j]
                for k in range(d):
                    sim[j + 1, k] = sim[j, k]
                j -= 1
            fs[j + 1] = ft
            for k in range(d):
                sim[j + 1, k] = tmp[k]
        spread = 0.0
        size = 0.0
        for j in range(1, d + 1):
            spread = max(spread, fabs(fs[j] - fs[0]))
            for k in range(d):
                size = max(size, fabs(sim[j, k] - sim[0, k]))
        if (spread <= fatol and size <= xatol) or nfev >= maxfev:
            break
        nit += 1
        for k in range(d):
            xbar[k] = 0.0
            for j in range(d):
                xbar[k] += sim[j, k]
            xbar[k] /= d
        for k in range(d):
            xr[k] = 2.0 * xbar[k] - sim[d, k]
        _clip(xr, lb, ub)
        fr = _call(fun, xr)
        nfev += 1
        shrink = False
        if fr < fs[0]:
            for k in range(d):
                xe[k] = 3.0 * xbar[k] - 2.0 * sim[d, k]
            _clip(xe, lb, ub)
            fe = _call(fun, xe)
            nfev += 1
            if fe < fr:
                sim[d, :] = xe
                fs[d] = fe
            else:
                sim[d, :] = xr
                fs[d] = fr
        elif fr < fs[d - 1]:
            sim[d, :] = xr
            fs[d] = fr
        else:
            if fr < fs[d]:
                for k in range(d):
                    xc[k] = xbar[k] + 0.5 * (xr[k] - xbar[k])
                _clip(xc, lb, ub)
                fc = _call(fun, xc)
                nfev += 1
                if fc <= fr:
                    sim[d, :] = xc
                    fs[d] = fc
                else:
                    shrink = True
            else:
                for k in range(d):
                    xc[k] = xbar[k] + 0.5 * (sim[d, k] - xbar[k])
                _clip(xc, lb, ub)
                fc = _call(fun, xc)
                nfev += 1
                if fc < fs[d]:
                    sim[d, :] = xc
                    fs[d] = fc
                else:
                    shrink = True
            if shrink:
                for j in range(1, d + 1):
                    for k in range(d):
                        sim[j, k] = sim[0, k] + 0.5 * (sim[j, k] - sim[0, k])
                    fs[j] = _call(fun, sim[j])
                    nfev += 1
    return np.array(sim[0]), fs[0], nfev, nit
