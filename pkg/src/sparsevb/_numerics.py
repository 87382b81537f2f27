"""Scalar special functions shared by the Python kernels and the public API."""

import math

SQRT2 = math.sqrt(2.0)
SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
# log(sqrt(pi) / sqrt(2))
LOG_SQRT_PI_OVER_2 = 0.5 * math.log(math.pi / 2.0)

GAMMA_FLOOR = 1e-10


def norm_cdf(x):
    """Standard normal cdf, accurate in both tails."""
    return 0.5 * math.erfc(-x / SQRT2)


def expit(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def logit(p):
    return math.log(p) - math.log1p(-p)


def clamp_gamma(g):
    if g < GAMMA_FLOOR:
        return GAMMA_FLOOR
    if g > 1.0 - GAMMA_FLOOR:
        return 1.0 - GAMMA_FLOOR
    return g


def xlogx(x):
    return 0.0 if x <= 0.0 else x * math.log(x)


def binary_entropy(p):
    """H(p) = -p log p - (1-p) log(1-p), with H(0) = H(1) = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"binary entropy is defined on [0, 1], got {p!r}")
    return -xlogx(p) - xlogx(1.0 - p)


def folded_normal_mean(mu, sigma):
    """E|T| for T ~ N(mu, sigma^2).

    Written with erf so that ``mu * (1 - 2 Phi(-mu/sigma))`` keeps full
    relative precision for small ``mu / sigma``.
    """
    z = mu / sigma
    return sigma * SQRT_2_OVER_PI * math.exp(-0.5 * z * z) + mu * math.erf(z / SQRT2)
