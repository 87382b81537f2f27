"""Derivative-free one-dimensional minimization (Brent's method)."""

import math
from dataclasses import dataclass

# (3 - sqrt(5)) / 2
GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))
_EPS = 2.220446049250313e-16

DEFAULT_TOL = 1e-8
DEFAULT_MAX_EVAL = 200


class ScalarOptimError(ArithmeticError):
    """A non-finite objective value was met during a 1-D minimization."""

    def __init__(self, message, x=None, coordinate=None):
        super().__init__(message)
        self.x = x
        self.coordinate = coordinate


@dataclass(frozen=True)
class BracketSpec:
    lo: float
    hi: float
    tol: float = DEFAULT_TOL
    max_eval: int = DEFAULT_MAX_EVAL

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise ValueError(f"invalid bracket [{self.lo!r}, {self.hi!r}]")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_eval < 1:
            raise ValueError("max_eval must be >= 1")


def _checked(f, x):
    fx = f(x)
    if not math.isfinite(fx):
        raise ScalarOptimError(f"objective is not finite at x={x!r} (value {fx!r})", x=x)
    return fx


def minimize_scalar(f, bracket):
    """Minimize ``f`` on ``[bracket.lo, bracket.hi]``.

    Golden-section search combined with successive parabolic interpolation
    (Brent, 1973). The search stops once the enclosing interval is shorter
    than ``bracket.tol`` or after ``bracket.max_eval`` evaluations of ``f``.
    The two endpoints are evaluated at the end and returned instead if
    they are better, so the result is never worse than either endpoint.

    Returns
    -------
    (x_star, f_star) : tuple of float
    """
    a, b = bracket.lo, bracket.hi
    max_eval = bracket.max_eval
    # tol1 = tol/4 makes the stopping rule equivalent to (b - a) <= tol
    tol_abs = 0.25 * bracket.tol

    x = w = v = a + GOLDEN * (b - a)
    fx = fw = fv = _checked(f, x)
    n_eval = 1
    d = e = 0.0

    while n_eval < max_eval - 2:
        xm = 0.5 * (a + b)
        tol1 = tol_abs + 2.0 * _EPS * abs(x)
        tol2 = 2.0 * tol1
        if abs(x - xm) <= tol2 - 0.5 * (b - a):
            break
        golden = True
        if abs(e) > tol1:
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
            if abs(p) < abs(0.5 * q * etemp) and q * (a - x) < p < q * (b - x):
                d = p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = tol1 if xm >= x else -tol1
                golden = False
        if golden:
            e = (a - x) if x >= xm else (b - x)
            d = GOLDEN * e
        if abs(d) >= tol1:
            u = x + d
        else:
            u = x + (tol1 if d > 0 else -tol1)
        fu = _checked(f, u)
        n_eval += 1
        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, fv = w, fw
            w, fw = x, fx
            x, fx = u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv = w, fw
                w, fw = u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu

    for end in (bracket.lo, bracket.hi):
        fe = _checked(f, end)
        if fe < fx:
            x, fx = end, fe
    return x, fx
