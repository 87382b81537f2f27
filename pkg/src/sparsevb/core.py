"""Regression data, prior configuration and the mean-field variational state."""

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ._numerics import GAMMA_FLOOR


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RegressionData:
    """Design, response and the products every coordinate sweep reads.

    Build instances with :func:`precompute`; all arrays are read-only.
    """

    X: np.ndarray
    Y: np.ndarray
    gram: np.ndarray
    yx: np.ndarray
    col_norms: np.ndarray
    x_norm: float

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def precompute(X, Y) -> RegressionData:
    """Validate ``(X, Y)`` and compute ``X^T X``, ``Y^T X`` and column norms."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise ValueError(f"X must be a matrix, got shape {X.shape}")
    if Y.ndim != 1:
        Y = Y.reshape(-1) if Y.ndim == 2 and 1 in Y.shape else Y
    if Y.ndim != 1:
        raise ValueError(f"Y must be a vector, got shape {Y.shape}")
    n, p = X.shape
    if n < 1 or p < 1:
        raise ValueError("X must have at least one row and one column")
    if Y.shape[0] != n:
        raise ValueError(f"dimension mismatch: X has {n} rows but Y has length {Y.shape[0]}")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite entries")
    if not np.all(np.isfinite(Y)):
        raise ValueError("Y contains non-finite entries")

    gram = X.T @ X
    gram = 0.5 * (gram + gram.T)
    col_norms = np.sqrt(np.einsum("ij,ij->j", X, X))
    return RegressionData(
        X=_frozen(X),
        Y=_frozen(Y),
        gram=_frozen(gram),
        yx=_frozen(Y @ X),
        col_norms=_frozen(col_norms),
        x_norm=float(col_norms.max()),
    )


def ridge_init(data: RegressionData) -> np.ndarray:
    """Ridge estimate ``(X^T X + I)^{-1} X^T Y`` used to start every fit."""
    a = data.gram + np.eye(data.p)
    return cho_solve(cho_factor(a, lower=True), data.yx)


@dataclass(frozen=True)
class LaplaceSlab:
    lam: float = 1.0

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"Laplace slab needs lam > 0, got {self.lam!r}")


@dataclass(frozen=True)
class GaussianSlab:
    slab_sd: float = 1.0

    def __post_init__(self):
        if not (self.slab_sd > 0 and math.isfinite(self.slab_sd)):
            raise ValueError(f"Gaussian slab needs slab_sd > 0, got {self.slab_sd!r}")


Slab = Union[LaplaceSlab, GaussianSlab]


@dataclass(frozen=True)
class PriorConfig:
    """Slab family plus the Beta(a0, b0) hyperparameters of the inclusion weight."""

    slab: Slab = field(default_factory=LaplaceSlab)
    a0: float = 1.0
    b0: float = 1.0

    def __post_init__(self):
        if not (self.a0 > 0 and self.b0 > 0):
            raise ValueError("a0 and b0 must be positive")

    @classmethod
    def default(cls, p, lam=1.0):
        """``a0 = 1``, ``b0 = p``, Laplace slab with ``lam``."""
        return cls(LaplaceSlab(lam), 1.0, float(p))

    @property
    def w_bar(self) -> float:
        return self.a0 / (self.a0 + self.b0)

    @property
    def log_prior_odds(self) -> float:
        return math.log(self.a0) - math.log(self.b0)

    @property
    def lam(self) -> float:
        if not isinstance(self.slab, LaplaceSlab):
            raise TypeError("prior does not have a Laplace slab")
        return self.slab.lam

    def lam_in_advised_range(self, data: RegressionData) -> bool:
        """Check ``||X||/p <= lam <= 4 ||X|| sqrt(log p)`` (advisory only)."""
        lo = data.x_norm / data.p
        hi = 4.0 * data.x_norm * math.sqrt(math.log(data.p)) if data.p > 1 else math.inf
        return lo <= self.lam <= hi


@dataclass(eq=False)
class VariationalState:
    """Per-coordinate slab means, slab standard deviations and inclusion probabilities."""

    mu: np.ndarray
    sigma: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        self.mu = np.array(self.mu, dtype=np.float64)
        self.sigma = np.array(self.sigma, dtype=np.float64)
        self.gamma = np.array(self.gamma, dtype=np.float64)
        if not (self.mu.shape == self.sigma.shape == self.gamma.shape) or self.mu.ndim != 1:
            raise ValueError("mu, sigma and gamma must be vectors of equal length")

    @classmethod
    def initial(cls, mu0, sigma0=1.0, gamma0=0.5):
        mu0 = np.asarray(mu0, dtype=np.float64)
        return cls(mu0.copy(), np.full(mu0.shape, float(sigma0)), np.full(mu0.shape, float(gamma0)))

    @property
    def p(self) -> int:
        return self.mu.shape[0]

    def copy(self):
        return VariationalState(self.mu.copy(), self.sigma.copy(), self.gamma.copy())

    def validate(self, hard=False):
        if not (np.all(np.isfinite(self.mu)) and np.all(np.isfinite(self.sigma))
                and np.all(np.isfinite(self.gamma))):
            raise ValueError("variational state has non-finite entries")
        if np.any(self.sigma <= 0):
            raise ValueError("sigma must be positive")
        if hard:
            if not np.all((self.gamma == 0.0) | (self.gamma == 1.0)):
                raise ValueError("hard-support state must have gamma in {0, 1}")
        elif np.any(self.gamma < GAMMA_FLOOR) or np.any(self.gamma > 1.0 - GAMMA_FLOOR):
            raise ValueError("gamma outside [floor, 1 - floor]")


def posterior_mean(state: VariationalState) -> np.ndarray:
    """Mean of the fitted spike-and-slab distribution, ``gamma * mu``."""
    return state.gamma * state.mu
