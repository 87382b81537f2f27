# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled coordinate-update kernels.

Statement-for-statement mirror of ``_pykernels``; the sweeps release the GIL
so independent fits can run on worker threads.
"""

from libc.math cimport erf, exp, fabs, isfinite, log, sqrt

from .scalar import ScalarOptimError

NAME = "cython"

cdef double SQRT2 = sqrt(2.0)
cdef double SQRT_2_OVER_PI = sqrt(2.0 / 3.141592653589793)
cdef double LOG_SQRT_PI_OVER_2 = 0.5 * log(3.141592653589793 / 2.0)
cdef double GAMMA_FLOOR = 1e-10
cdef double GOLDEN = 0.5 * (3.0 - sqrt(5.0))
cdef double EPS = 2.220446049250313e-16

ctypedef struct Objective:
    int kind          # 0: f as a function of mu, 1: g as a function of sigma
    double mu
    double sigma
    double diag
    double yx
    double cross
    double lam


cdef inline double folded_mean(double mu, double sigma) noexcept nogil:
    cdef double z = mu / sigma
    return sigma * SQRT_2_OVER_PI * exp(-0.5 * z * z) + mu * erf(z / SQRT2)


cdef inline double f_mu(double mu, double sigma, double diag, double yx,
                        double cross, double lam) noexcept nogil:
    return mu * cross + 0.5 * diag * mu * mu - yx * mu + lam * folded_mean(mu, sigma)


cdef inline double g_sigma(double sigma, double mu, double diag, double lam) noexcept nogil:
    return 0.5 * diag * sigma * sigma + lam * folded_mean(mu, sigma) - log(sigma)


cdef inline double gamma_logit(double mu, double sigma, double diag, double yx, double cross,
                               double lam, double log_odds) noexcept nogil:
    return (log_odds + LOG_SQRT_PI_OVER_2 + log(sigma * lam) + yx * mu - mu * cross
            - 0.5 * diag * (sigma * sigma + mu * mu) - lam * folded_mean(mu, sigma) + 0.5)


cdef inline double expit(double x) noexcept nogil:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


cdef inline double clamp_gamma(double g) noexcept nogil:
    if g < GAMMA_FLOOR:
        return GAMMA_FLOOR
    if g > 1.0 - GAMMA_FLOOR:
        return 1.0 - GAMMA_FLOOR
    return g


cdef inline double xlogx(double x) noexcept nogil:
    if x <= 0.0:
        return 0.0
    return x * log(x)


cdef inline double entropy(double p) noexcept nogil:
    return -xlogx(p) - xlogx(1.0 - p)


cdef inline double evaluate(Objective* o, double x) noexcept nogil:
    if o.kind == 0:
        return f_mu(x, o.sigma, o.diag, o.yx, o.cross, o.lam)
    return g_sigma(x, o.mu, o.diag, o.lam)


cdef int brent(Objective* o, double lo, double hi, double tol, int max_eval,
               double* x_out, double* f_out) noexcept nogil:
    """Same iteration as scalar.minimize_scalar; returns -1 on a non-finite value."""
    cdef double a = lo, b = hi
    cdef double tol_abs = 0.25 * tol
    cdef double x, w, v, fx, fw, fv, u, fu, d = 0.0, e = 0.0
    cdef double xm, tol1, tol2, p, q, r, etemp, end, fe
    cdef int n_eval, golden, k

    x = a + GOLDEN * (b - a)
    w = x
    v = x
    fx = evaluate(o, x)
    if not isfinite(fx):
        x_out[0] = x
        return -1
    fw = fx
    fv = fx
    n_eval = 1
    while n_eval < max_eval - 2:
        xm = 0.5 * (a + b)
        tol1 = tol_abs + 2.0 * EPS * fabs(x)
        tol2 = 2.0 * tol1
        if fabs(x - xm) <= tol2 - 0.5 * (b - a):
            break
        golden = 1
        if fabs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            else:
                q = -q
            etemp = e
            e = d
            if fabs(p) < fabs(0.5 * q * etemp) and q * (a - x) < p and p < q * (b - x):
                d = p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = tol1 if xm >= x else -tol1
                golden = 0
        if golden:
            e = (a - x) if x >= xm else (b - x)
            d = GOLDEN * e
        if fabs(d) >= tol1:
            u = x + d
        else:
            u = x + (tol1 if d > 0 else -tol1)
        fu = evaluate(o, u)
        if not isfinite(fu):
            x_out[0] = u
            return -1
        n_eval += 1
        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v = w
            fv = fw
            w = x
            fw = fx
            x = u
            fx = fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v = w
                fv = fw
                w = u
                fw = fu
            elif fu <= fv or v == x or v == w:
                v = u
                fv = fu
    for k in range(2):
        end = lo if k == 0 else hi
        fe = evaluate(o, end)
        if not isfinite(fe):
            x_out[0] = end
            return -1
        if fe < fx:
            x = end
            fx = fe
    x_out[0] = x
    f_out[0] = fx
    return 0


cdef int argmin(Objective* o, double lo, double hi, double current, double tol,
                int max_eval, double* out) noexcept nogil:
    cdef double f_cur = evaluate(o, current)
    cdef double x, fx
    if hi - lo <= tol:
        x = 0.5 * (lo + hi)
        fx = evaluate(o, x)
    elif brent(o, lo, hi, tol, max_eval, &x, &fx) != 0:
        out[0] = x
        return -1
    if fx <= f_cur or not isfinite(f_cur):
        out[0] = x
    else:
        out[0] = current
    return 0


cdef int update_one(Py_ssize_t i, const double[:, ::1] gram, const double[::1] yx,
                    double[::1] mu, double[::1] sigma, double[::1] gamma, double lam,
                    double log_odds_i, bint hard, double tol, int max_eval,
                    double* bad_x) noexcept nogil:
    cdef Py_ssize_t k, p = gram.shape[0]
    cdef double diag = gram[i, i]
    cdef double cross = 0.0
    cdef double c, lo, hi, out, z
    cdef Objective o
    for k in range(p):
        cross += gram[i, k] * (gamma[k] * mu[k])
    cross -= diag * gamma[i] * mu[i]

    o.kind = 0
    o.sigma = sigma[i]
    o.diag = diag
    o.yx = yx[i]
    o.cross = cross
    o.lam = lam
    if diag > 0.0:
        lo = (yx[i] - cross) / diag - lam / diag
        hi = (yx[i] - cross) / diag + lam / diag
    else:
        lo = -1.0
        hi = 1.0
    if argmin(&o, lo, hi, mu[i], tol, max_eval, &out) != 0:
        bad_x[0] = out
        return -1
    mu[i] = out

    if lam > 0.0 or diag > 0.0:
        o.kind = 1
        o.mu = mu[i]
        c = lam * SQRT_2_OVER_PI
        if diag > 0.0:
            lo = 2.0 / (c + sqrt(c * c + 4.0 * diag))
            hi = 1.0 / sqrt(diag)
        else:
            lo = 1e-6
            hi = 10.0
            if c > 0.0 and 10.0 / c > hi:
                hi = 10.0 / c
        if argmin(&o, lo, hi, sigma[i], tol, max_eval, &out) != 0:
            bad_x[0] = out
            return -1
        sigma[i] = out

    z = gamma_logit(mu[i], sigma[i], diag, yx[i], cross, lam, log_odds_i)
    if hard:
        gamma[i] = 1.0 if z > 0.0 else 0.0
    else:
        gamma[i] = clamp_gamma(expit(z))
    return 0


def laplace_update(Py_ssize_t i, const double[:, ::1] gram, const double[::1] yx,
                   double[::1] mu, double[::1] sigma, double[::1] gamma, double lam,
                   double log_odds_i, bint hard, double tol, int max_eval):
    """Update (mu_i, sigma_i, gamma_i) in place; returns the old gamma_i."""
    cdef double old = gamma[i]
    cdef double bad_x = 0.0
    cdef int status
    with nogil:
        status = update_one(i, gram, yx, mu, sigma, gamma, lam, log_odds_i, hard,
                            tol, max_eval, &bad_x)
    if status != 0:
        raise ScalarOptimError(f"coordinate {i}: objective is not finite at x={bad_x!r}",
                               x=bad_x, coordinate=i)
    return old


def laplace_sweep(const double[:, ::1] gram, const double[::1] yx, double[::1] mu,
                  double[::1] sigma, double[::1] gamma, const Py_ssize_t[::1] order,
                  double lam, const double[::1] log_odds, bint hard, double tol, int max_eval):
    """One pass over ``order``; returns the max change in binary entropy."""
    cdef Py_ssize_t j, i = 0, n = order.shape[0]
    cdef double delta = 0.0, old, change, bad_x = 0.0
    cdef int status = 0
    with nogil:
        for j in range(n):
            i = order[j]
            old = gamma[i]
            status = update_one(i, gram, yx, mu, sigma, gamma, lam, log_odds[i], hard,
                                tol, max_eval, &bad_x)
            if status != 0:
                break
            change = fabs(entropy(gamma[i]) - entropy(old))
            if change > delta:
                delta = change
    if status != 0:
        raise ScalarOptimError(f"coordinate {i}: objective is not finite at x={bad_x!r}",
                               x=bad_x, coordinate=i)
    return delta


def gauss_sweep(const double[:, ::1] gram, const double[::1] yx, double[::1] mu,
                double[::1] sigma, double[::1] gamma, const Py_ssize_t[::1] order,
                double inv_slab_var, const double[::1] gamma_offset):
    """Closed-form component-wise pass for Gaussian prior slabs."""
    cdef Py_ssize_t j, i, k, n = order.shape[0], p = gram.shape[0]
    cdef double delta = 0.0, diag, cross, s, m, old, change
    with nogil:
        for j in range(n):
            i = order[j]
            diag = gram[i, i]
            cross = 0.0
            for k in range(p):
                cross += gram[i, k] * (gamma[k] * mu[k])
            cross -= diag * gamma[i] * mu[i]
            s = 1.0 / sqrt(diag + inv_slab_var)
            sigma[i] = s
            m = s * s * (yx[i] - cross)
            mu[i] = m
            old = gamma[i]
            gamma[i] = clamp_gamma(expit(gamma_offset[i] + log(s) + 0.5 * m * m / (s * s)))
            change = fabs(entropy(gamma[i]) - entropy(old))
            if change > delta:
                delta = change
    return delta
