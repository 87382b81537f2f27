"""Pure-Python coordinate-update kernels.

Reference implementation of the hot loops. ``_ckernels.pyx`` mirrors every
function here statement for statement; ``_backend`` picks one at import.
"""

import math

import numpy as np

from ._numerics import (
    LOG_SQRT_PI_OVER_2,
    SQRT_2_OVER_PI,
    binary_entropy,
    clamp_gamma,
    expit,
    folded_normal_mean,
)
from .scalar import BracketSpec, ScalarOptimError, minimize_scalar

NAME = "python"


def laplace_f(mu, sigma, diag, yx, cross, lam):
    return mu * cross + 0.5 * diag * mu * mu - yx * mu + lam * folded_normal_mean(mu, sigma)


def laplace_g(sigma, mu, diag, lam):
    return 0.5 * diag * sigma * sigma + lam * folded_normal_mean(mu, sigma) - math.log(sigma)


def laplace_logit(mu, sigma, diag, yx, cross, lam, log_odds):
    return (
        log_odds
        + LOG_SQRT_PI_OVER_2
        + math.log(sigma * lam)
        + yx * mu
        - mu * cross
        - 0.5 * diag * (sigma * sigma + mu * mu)
        - lam * folded_normal_mean(mu, sigma)
        + 0.5
    )


def mu_bracket(diag, yx, cross, lam):
    # f'(mu) = cross + diag*mu - yx + lam*erf(.), and |erf| < 1
    if diag > 0.0:
        centre = (yx - cross) / diag
        half = lam / diag
        return centre - half, centre + half
    return -1.0, 1.0


def sigma_bracket(diag, lam):
    # g'(s) = diag*s + lam*sqrt(2/pi)*exp(.) - 1/s with exp(.) in (0, 1]
    c = lam * SQRT_2_OVER_PI
    if diag > 0.0:
        return 2.0 / (c + math.sqrt(c * c + 4.0 * diag)), 1.0 / math.sqrt(diag)
    return 1e-6, max(10.0, 10.0 / c) if c > 0.0 else 10.0


def _argmin(fun, lo, hi, current, tol, max_eval):
    """Bracketed Brent step that never returns a point worse than ``current``."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        # a non-finite neighbour poisons the cross term and hence the bracket
        raise ScalarOptimError(f"objective is not finite at x={lo!r}", x=lo)
    f_cur = fun(current)
    if hi - lo <= tol:
        x = 0.5 * (lo + hi)
        fx = fun(x)
    else:
        x, fx = minimize_scalar(fun, BracketSpec(lo, hi, tol, max_eval))
    if fx <= f_cur or not math.isfinite(f_cur):
        return x
    return current


def laplace_update(i, gram, yx, mu, sigma, gamma, lam, log_odds_i, hard, tol, max_eval):
    """Update (mu_i, sigma_i, gamma_i) in place; returns the old gamma_i."""
    diag = gram[i, i]
    cross = float(np.dot(gram[i], gamma * mu)) - diag * gamma[i] * mu[i]
    yx_i = yx[i]
    try:
        lo, hi = mu_bracket(diag, yx_i, cross, lam)
        s = sigma[i]
        mu[i] = _argmin(lambda m: laplace_f(m, s, diag, yx_i, cross, lam),
                        lo, hi, mu[i], tol, max_eval)
        m = mu[i]
        if lam > 0.0 or diag > 0.0:
            lo, hi = sigma_bracket(diag, lam)
            sigma[i] = _argmin(lambda t: laplace_g(t, m, diag, lam),
                               lo, hi, sigma[i], tol, max_eval)
    except ScalarOptimError as exc:
        raise ScalarOptimError(f"coordinate {i}: {exc}", x=exc.x, coordinate=i) from exc
    z = laplace_logit(mu[i], sigma[i], diag, yx_i, cross, lam, log_odds_i)
    old = gamma[i]
    if hard:
        gamma[i] = 1.0 if z > 0.0 else 0.0
    else:
        gamma[i] = clamp_gamma(expit(z))
    return old


def laplace_sweep(gram, yx, mu, sigma, gamma, order, lam, log_odds, hard, tol, max_eval):
    """One pass over ``order``; returns the max change in binary entropy."""
    delta = 0.0
    for i in order:
        old = laplace_update(i, gram, yx, mu, sigma, gamma, lam, log_odds[i], hard, tol, max_eval)
        change = abs(binary_entropy(gamma[i]) - binary_entropy(old))
        if change > delta:
            delta = change
    return delta


def gauss_sweep(gram, yx, mu, sigma, gamma, order, inv_slab_var, gamma_offset):
    """Closed-form component-wise pass for Gaussian prior slabs."""
    delta = 0.0
    for i in order:
        diag = gram[i, i]
        cross = float(np.dot(gram[i], gamma * mu)) - diag * gamma[i] * mu[i]
        s = 1.0 / math.sqrt(diag + inv_slab_var)
        sigma[i] = s
        m = s * s * (yx[i] - cross)
        mu[i] = m
        old = gamma[i]
        gamma[i] = clamp_gamma(expit(gamma_offset[i] + math.log(s) + 0.5 * m * m / (s * s)))
        change = abs(binary_entropy(gamma[i]) - binary_entropy(old))
        if change > delta:
            delta = change
    return delta
