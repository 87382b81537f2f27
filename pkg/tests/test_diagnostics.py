import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsevb.core import precompute
from sparsevb.diagnostics import (EnumerationCapError, compatibility_report, mutual_coherence,
                                  sparse_singular_value)


def data(X):
    return precompute(X, np.zeros(np.asarray(X).shape[0]))


def coherence_loops(X):
    p = X.shape[1]
    best = 0.0
    for i in range(p):
        for j in range(p):
            if i != j:
                num = abs(sum(X[k, i] * X[k, j] for k in range(X.shape[0])))
                den = math.sqrt(sum(v * v for v in X[:, i])) * math.sqrt(sum(v * v for v in X[:, j]))
                best = max(best, num / den)
    return best


def test_identity_exact():
    rep = compatibility_report(data(np.eye(6)), 3)
    assert rep.mc == 0.0
    assert all(v == 1.0 for v in rep.phi_tilde.values())
    assert rep.flags == [] and rep.lemma_d1_verified


def test_duplicate_column():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((6, 3))
    X = np.hstack([X, X[:, :1]])
    assert mutual_coherence(data(X)) == pytest.approx(1.0)
    rep = compatibility_report(data(X), 2)
    assert rep.phi_tilde[2] == pytest.approx(0.0, abs=1e-10)
    assert any("phi_tilde(2)" in f for f in rep.flags)


def test_coherence_loop_oracle():
    X = np.random.default_rng(2).standard_normal((8, 5))
    assert mutual_coherence(data(X)) == pytest.approx(coherence_loops(X), abs=1e-12)


def test_pairwise_closed_form_oracle():
    X = np.random.default_rng(3).standard_normal((6, 8))
    norm = np.linalg.norm(X, axis=0).max()
    best = math.inf
    for i, j in itertools.combinations(range(8), 2):
        a, b, c = X[:, i] @ X[:, i], X[:, j] @ X[:, j], X[:, i] @ X[:, j]
        lam_min = 0.5 * (a + b) - math.sqrt(0.25 * (a - b) ** 2 + c * c)
        best = min(best, math.sqrt(max(lam_min, 0.0)))
    assert len(list(itertools.combinations(range(8), 2))) == 28
    assert sparse_singular_value(data(X), 2) == pytest.approx(best / norm, abs=1e-12)


def test_equicorrelated_gram():
    r, p = 0.3, 6
    C = np.full((p, p), r) + (1 - r) * np.eye(p)
    X = np.linalg.cholesky(C).T
    rep = compatibility_report(data(X), 3)
    assert rep.mc == pytest.approx(r, abs=1e-12)
    for s, v in rep.phi_tilde.items():
        # smallest eigenvalue of an s x s equicorrelated block is 1 - r
        assert v ** 2 == pytest.approx(1 - r if s > 1 else 1.0, abs=1e-10)
        assert v ** 2 >= 1 - s * r - 1e-12


def test_errors():
    with pytest.raises(ValueError, match="column 1"):
        mutual_coherence(data(np.array([[1.0, 0.0], [2.0, 0.0]])))
    with pytest.raises(ValueError):
        mutual_coherence(data(np.ones((3, 1))))
    with pytest.raises(ValueError):
        sparse_singular_value(data(np.eye(3)), 4)
    with pytest.raises(EnumerationCapError, match="smaller s"):
        sparse_singular_value(data(np.random.default_rng(0).standard_normal((10, 40))), 5, cap=1000)


def test_chunked_enumeration_agrees(monkeypatch):
    import sparsevb.diagnostics as dg
    X = np.random.default_rng(4).standard_normal((7, 9))
    full = sparse_singular_value(data(X), 3)
    monkeypatch.setattr(dg, "_CHUNK_DOUBLES", 7 * 3 * 5)
    assert sparse_singular_value(data(X), 3) == full


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(5, 30), st.integers(2, 12), st.floats(0.01, 100))
def test_properties(seed, n, p, scale):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p)) * rng.uniform(0.2, 3, p)
    d = data(X)
    rep = compatibility_report(d, 3)
    phis = [rep.phi_tilde[s] for s in sorted(rep.phi_tilde)]
    assert all(0.0 <= v <= 1.0 + 1e-12 for v in phis)
    assert all(b <= a + 1e-12 for a, b in zip(phis, phis[1:]))
    assert 0.0 <= rep.mc <= 1.0
    assert mutual_coherence(data(X * rng.uniform(0.1, 10, p))) == pytest.approx(rep.mc, abs=1e-12)
