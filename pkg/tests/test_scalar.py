import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsevb.scalar import BracketSpec, ScalarOptimError, minimize_scalar


def test_quadratic_vertex():
    x, fx = minimize_scalar(lambda x: (x - 2.0) ** 2, BracketSpec(-10, 10, 1e-8))
    assert x == pytest.approx(2.0, abs=1e-6)
    assert fx == pytest.approx(0.0, abs=1e-12)


def test_kinked_objective():
    x, _ = minimize_scalar(lambda x: abs(x) + 0.5 * x * x, BracketSpec(-5, 5))
    assert x == pytest.approx(0.0, abs=1e-6)


def _unit_mu_objective(x):
    phi = 0.5 * math.erfc(x / math.sqrt(2))  # Phi(-x)
    return 0.5 * x * x + math.sqrt(2 / math.pi) * math.exp(-0.5 * x * x) + x * (1 - 2 * phi)


def test_unit_mu_objective_minimizer_matches_grid():
    grid = np.arange(-3, 3, 1e-4)
    vals = [_unit_mu_objective(g) for g in grid]
    grid_min = grid[int(np.argmin(vals))]
    assert grid_min == pytest.approx(0.0, abs=1e-4)
    x, _ = minimize_scalar(_unit_mu_objective, BracketSpec(-10, 10))
    assert x == pytest.approx(0.0, abs=1e-6)


def test_endpoint_minimum_is_returned():
    x, fx = minimize_scalar(lambda x: x, BracketSpec(0.0, 1.0))
    assert x == 0.0 and fx == 0.0
    x, _ = minimize_scalar(lambda x: -x, BracketSpec(0.0, 1.0))
    assert x == 1.0


def test_non_finite_value_names_point():
    with pytest.raises(ScalarOptimError) as err:
        minimize_scalar(lambda x: math.nan if x > 0.1 else x * x, BracketSpec(-1, 1))
    assert err.value.x is not None and "x=" in str(err.value)


@pytest.mark.parametrize("kw", [dict(lo=1, hi=1), dict(lo=2, hi=1), dict(lo=0, hi=1, tol=0),
                                dict(lo=0, hi=math.inf), dict(lo=0, hi=1, max_eval=0)])
def test_invalid_bracket(kw):
    with pytest.raises(ValueError):
        BracketSpec(**kw)


def test_max_eval_respected():
    calls = []

    def f(x):
        calls.append(x)
        return math.cos(x)

    minimize_scalar(f, BracketSpec(0, 6, tol=1e-15, max_eval=12))
    assert len(calls) <= 12


@settings(max_examples=60, deadline=None)
@given(st.floats(-50, 50), st.floats(0.1, 10), st.floats(0, 5),
       st.floats(-60, -1), st.floats(1, 60))
def test_grid_optimality_on_convex_functions(c, a, k, lo, hi):
    # a/2 (x - c)^2 + k |x| is convex, hence unimodal
    f = lambda x: 0.5 * a * (x - c) ** 2 + k * abs(x)
    tol = 1e-8
    x, fx = minimize_scalar(f, BracketSpec(lo, hi, tol))
    assert lo <= x <= hi
    assert fx == f(x)
    assert fx <= min(f(lo), f(hi))
    grid = np.linspace(lo, hi, 2001)
    tol_f = 1e-8 * (1 + abs(fx))
    # a grid spacing >> tol is fine: optimality must hold against every grid point
    assert fx <= min(f(g) for g in grid) + tol_f


def test_deterministic():
    f = lambda x: math.cosh(x - 0.3)
    assert minimize_scalar(f, BracketSpec(-4, 4)) == minimize_scalar(f, BracketSpec(-4, 4))
