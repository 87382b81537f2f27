import numpy as np
import pytest

from sparsevb.core import precompute


def random_data(seed, n, p, signal=3.0, s=None):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    theta = np.zeros(p)
    s = min(p, 2) if s is None else s
    theta[:s] = signal
    Y = X @ theta + rng.standard_normal(n)
    return precompute(X, Y)


@pytest.fixture
def small_data():
    return random_data(0, 20, 8)


ACCEPTANCE_LINES = {}


def record_criterion(number, passed, detail):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
