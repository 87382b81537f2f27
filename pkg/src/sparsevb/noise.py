"""Noise level estimation and rescaling to unit noise.

With ``Y = X theta + s Z`` and an estimate ``s_hat``, the rescaled model
``Y/s_hat = (X/s_hat) theta + Z'`` has approximately unit noise, which is
what every fitting engine assumes.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import RegressionData, precompute, ridge_init

METHODS = ("known", "ridge-df", "plugin")


@dataclass(frozen=True)
class NoiseEstimate:
    sigma_hat: float
    method: str
    value: Optional[float] = None
    df: float = 0.0

    def __post_init__(self):
        if not (self.sigma_hat > 0 and math.isfinite(self.sigma_hat)):
            raise ValueError(f"noise estimate must be positive and finite, got {self.sigma_hat!r}")
        if self.method not in METHODS:
            raise ValueError(f"unknown noise method {self.method!r}")


def ridge_dof(data: RegressionData) -> float:
    """Effective degrees of freedom ``tr(X (X^TX + I)^{-1} X^T)`` of the unit ridge."""
    d = np.clip(np.linalg.eigvalsh(data.gram), 0.0, None)
    return float(np.sum(d / (d + 1.0)))


def estimate_noise_sd(data: RegressionData, method: str = "ridge-df",
                      value: Optional[float] = None) -> NoiseEstimate:
    """Estimate the noise standard deviation.

    ``known`` and ``plugin`` return ``value`` unchanged (``plugin`` marks an
    estimate computed elsewhere). ``ridge-df`` uses the unit-penalty ridge
    residuals: ``||Y - X mu_ridge||^2 / (n - df)``.
    """
    if method in ("known", "plugin"):
        if value is None:
            raise ValueError(f"method {method!r} needs a value")
        return NoiseEstimate(float(value), method, float(value), 0.0)
    if method != "ridge-df":
        raise ValueError(f"unknown noise method {method!r}")
    if data.n < 2:
        raise ValueError("noise estimation needs n >= 2")
    df = ridge_dof(data)
    if df >= data.n:
        raise ValueError(
            f"ridge fit is saturated (df={df:.6g} >= n={data.n}); "
            "pass a known or plug-in noise level instead"
        )
    resid = data.Y - data.X @ ridge_init(data)
    return NoiseEstimate(math.sqrt(float(resid @ resid) / (data.n - df)), "ridge-df", None, df)


def rescale(data: RegressionData, est: NoiseEstimate) -> RegressionData:
    """Divide design and response by ``est.sigma_hat``."""
    s = est.sigma_hat
    if s == 1.0:
        return data
    return precompute(data.X / s, data.Y / s)
