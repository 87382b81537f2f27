"""Design-matrix diagnostics: mutual coherence and sparse singular values.

``phi_tilde(s)`` is the smallest singular value over all size-``s`` column
submatrices divided by the largest column norm. Every size-``s`` subset is
enumerated, so the cost is ``C(p, s)`` small SVDs; there is deliberately no
sampling fallback.

The compatibility numbers defined through l1 cones (the plain and uniform
compatibility constants) are not computed: they are non-convex continuous
infima with no exact finite algorithm.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from .core import RegressionData

ENUMERATION_CAP = 2_000_000
FLAG_THRESHOLD = 0.01
LEMMA_TOL = 1e-9
_CHUNK_DOUBLES = 1 << 22


class EnumerationCapError(ValueError):
    pass


def _require_nonzero_columns(data):
    zero = np.flatnonzero(data.col_norms == 0.0)
    if zero.size:
        raise ValueError(f"column {int(zero[0])} of X is identically zero")


def mutual_coherence(data: RegressionData) -> float:
    """Largest absolute correlation between two distinct columns of X."""
    if data.p < 2:
        raise ValueError("mutual coherence needs at least two columns")
    _require_nonzero_columns(data)
    corr = data.gram / np.outer(data.col_norms, data.col_norms)
    np.fill_diagonal(corr, 0.0)
    return float(min(np.max(np.abs(corr)), 1.0))


def sparse_singular_value(data: RegressionData, s: int, cap: int = ENUMERATION_CAP) -> float:
    """Exact ``min_{|S| = s} sigma_min(X_S) / ||X||`` by exhaustive enumeration."""
    n, p = data.n, data.p
    if not 1 <= s <= min(n, p):
        raise ValueError(f"s must satisfy 1 <= s <= min(n, p) = {min(n, p)}, got {s}")
    if data.x_norm == 0.0:
        raise ValueError("X is identically zero")
    n_subsets = math.comb(p, s)
    if n_subsets > cap:
        raise EnumerationCapError(
            f"C({p}, {s}) = {n_subsets} subsets exceeds the enumeration cap {cap}; "
            "use a smaller s"
        )
    if s == 1:
        return float(data.col_norms.min() / data.x_norm)
    X = np.asarray(data.X)
    best = math.inf
    subsets = itertools.combinations(range(p), s)
    per_chunk = max(1, _CHUNK_DOUBLES // (n * s))
    while True:
        chunk = np.array(list(itertools.islice(subsets, per_chunk)), dtype=np.intp)
        if chunk.size == 0:
            break
        # (m, n, s) stack of column submatrices
        blocks = np.transpose(X[:, chunk], (1, 0, 2))
        sv = np.linalg.svd(blocks, compute_uv=False)
        best = min(best, float(sv[:, -1].min()))
    return best / data.x_norm


@dataclass
class CompatibilityReport:
    mc: float
    x_norm: float
    col_norm_min_ratio: float
    phi_tilde: Dict[int, float]
    flags: List[str] = field(default_factory=list)
    lemma_d1_verified: bool = True
    not_computed: str = (
        "compatibility numbers over l1 cones are not computed "
        "(non-convex infima without an exact algorithm)"
    )

    def to_dict(self):
        return {
            "mc": self.mc,
            "x_norm": self.x_norm,
            "col_norm_min_ratio": self.col_norm_min_ratio,
            "phi_tilde": {str(k): v for k, v in sorted(self.phi_tilde.items())},
            "lemma_d1_verified": self.lemma_d1_verified,
            "flags": list(self.flags),
            "not_computed": self.not_computed,
        }


def compatibility_report(data: RegressionData, s_max: int = 3,
                         cap: int = ENUMERATION_CAP) -> CompatibilityReport:
    """Mutual coherence, ``||X||`` and ``phi_tilde(s)`` for ``s = 1..s_max``.

    Each ``phi_tilde(s)^2 >= phi_tilde(1)^2 - s * mc`` is checked; a
    violation means a numerical bug and raises ``AssertionError``.
    Values with ``phi_tilde(s)^2 < 0.01`` are flagged.
    """
    s_max = min(s_max, data.n, data.p)
    mc = mutual_coherence(data)
    phi1 = float(data.col_norms.min() / data.x_norm)
    phis = {s: sparse_singular_value(data, s, cap) for s in range(1, s_max + 1)}
    flags = []
    for s, v in phis.items():
        bound = phi1 ** 2 - s * mc
        if v ** 2 < bound - LEMMA_TOL:
            raise AssertionError(
                f"lower bound violated at s={s}: phi_tilde^2={v ** 2!r} < {bound!r}"
            )
        if v ** 2 < FLAG_THRESHOLD:
            flags.append(f"phi_tilde({s})^2 = {v ** 2:.3g} < {FLAG_THRESHOLD}: "
                         f"some {s}-sparse directions are nearly unidentifiable")
    return CompatibilityReport(mc, data.x_norm, phi1, phis, flags, True)
