import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import random_data
from sparsevb._backend import compiled_kernels, python_kernels
from sparsevb.cavi import update_order
from sparsevb.core import ridge_init
from sparsevb.scalar import ScalarOptimError

needs_ext = pytest.mark.skipif(compiled_kernels is None, reason="compiled extension not built")


def _state(d, gamma0=0.1):
    mu = ridge_init(d)
    return mu.copy(), np.ones(d.p), np.full(d.p, gamma0)


@needs_ext
@pytest.mark.parametrize("hard", [False, True])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_laplace_sweep_parity(seed, hard):
    d = random_data(seed, 30, 45, s=5)
    order = update_order("prioritized", ridge_init(d))
    log_odds = np.full(d.p, -np.log(45.0))
    runs = []
    for k in (python_kernels, compiled_kernels):
        mu, sigma, gamma = _state(d, 0.0 if hard else 0.1)
        deltas = [k.laplace_sweep(d.gram, d.yx, mu, sigma, gamma, order, 1.3, log_odds, hard,
                                  1e-8, 200) for _ in range(4)]
        runs.append((mu, sigma, gamma, deltas))
    for a, b in zip(runs[0], runs[1]):
        np.testing.assert_allclose(a, b, rtol=1e-6, atol=1e-6)


@needs_ext
def test_gauss_sweep_parity():
    d = random_data(3, 20, 25, s=4)
    order = np.arange(d.p, dtype=np.intp)
    offset = np.full(d.p, -np.log(25.0))
    out = []
    for k in (python_kernels, compiled_kernels):
        mu, sigma, gamma = _state(d)
        deltas = [k.gauss_sweep(d.gram, d.yx, mu, sigma, gamma, order, 0.25, offset) for _ in range(3)]
        out.append((mu, sigma, gamma, deltas))
    for a, b in zip(*out):
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)


@needs_ext
def test_single_update_parity():
    d = random_data(4, 15, 6)
    for k_index in range(6):
        res = []
        for k in (python_kernels, compiled_kernels):
            mu, sigma, gamma = _state(d, 0.4)
            old = k.laplace_update(k_index, d.gram, d.yx, mu, sigma, gamma, 0.9, -1.0, False, 1e-8, 200)
            res.append((old, mu[k_index], sigma[k_index], gamma[k_index]))
        np.testing.assert_allclose(res[0], res[1], rtol=1e-7, atol=1e-9)


@pytest.mark.parametrize("kernels", [python_kernels] + ([compiled_kernels] if compiled_kernels else []),
                         ids=lambda k: k.NAME)
def test_non_finite_neighbour_raises_with_coordinate(kernels):
    gram = np.array([[1.0, 0.5], [0.5, 1.0]])
    mu, sigma, gamma = np.array([0.0, np.nan]), np.ones(2), np.full(2, 0.5)
    with pytest.raises(ScalarOptimError) as err:
        kernels.laplace_update(0, gram, np.array([1.0, 2.0]), mu, sigma, gamma, 1.0, 0.0, False, 1e-8, 200)
    assert "coordinate 0" in str(err.value)


def test_pure_python_fallback_selected_by_env():
    code = "import sparsevb; print(sparsevb.BACKEND)"
    env = dict(os.environ, SPARSEVB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_pure_python_fit_matches_default_backend():
    code = (
        "import numpy as np, sparsevb as s\n"
        "rng = np.random.default_rng(0); X = rng.standard_normal((25, 30)); t = np.zeros(30); t[:3] = 4\n"
        "d = s.precompute(X, X @ t + rng.standard_normal(25))\n"
        "r = s.cavi_fit(d, s.PriorConfig.default(30))\n"
        "print(repr(r.state.mu.tolist())); print(repr(r.state.gamma.tolist()))\n"
    )
    outs = []
    for flag in ("1", "0"):
        env = dict(os.environ, SPARSEVB_PURE_PYTHON=flag)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                   text=True, check=True).stdout.splitlines())
    for a, b in zip(*outs):
        np.testing.assert_allclose(eval(a), eval(b), rtol=1e-6, atol=1e-6)
