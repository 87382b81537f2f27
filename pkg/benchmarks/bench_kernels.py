"""Compare the compiled and pure-Python coordinate kernels.

    python benchmarks/bench_kernels.py [--n 100] [--p 200] [--repeat 5]

Times single Laplace and Gaussian-slab sweeps on a fixed random instance,
plus one full prioritized fit, with each backend.
"""

import argparse
import time

import numpy as np

from sparsevb._backend import compiled_kernels, python_kernels
from sparsevb.cavi import update_order
from sparsevb.core import precompute, ridge_init


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def instance(n, p, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    theta = np.zeros(p)
    theta[rng.choice(p, size=max(1, p // 10), replace=False)] = 10.0
    return precompute(X, X @ theta + rng.standard_normal(n))


def laplace_sweep(k, d, order, log_odds):
    mu, sigma, gamma = ridge_init(d), np.ones(d.p), np.full(d.p, 1.0 / (d.p + 1))
    return lambda: k.laplace_sweep(d.gram, d.yx, mu, sigma, gamma, order, 1.0, log_odds,
                                   False, 1e-8, 200)


def gauss_sweep(k, d, order, offset):
    mu, sigma, gamma = ridge_init(d), np.ones(d.p), np.full(d.p, 1.0 / (d.p + 1))
    return lambda: k.gauss_sweep(d.gram, d.yx, mu, sigma, gamma, order, 1.0, offset)


def full_fit(k, d, order, log_odds, max_sweeps=1000, eps=1e-5):
    def run():
        mu, sigma, gamma = ridge_init(d), np.ones(d.p), np.full(d.p, 1.0 / (d.p + 1))
        for _ in range(max_sweeps):
            if k.laplace_sweep(d.gram, d.yx, mu, sigma, gamma, order, 1.0, log_odds,
                               False, 1e-8, 200) <= eps:
                break
    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--p", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    d = instance(args.n, args.p)
    order = update_order("prioritized", ridge_init(d))
    log_odds = np.full(d.p, -np.log(d.p))
    backends = [python_kernels] + ([compiled_kernels] if compiled_kernels is not None else [])
    if compiled_kernels is None:
        print("compiled extension not built; timing the Python kernels only")

    cases = [("laplace sweep", laplace_sweep, log_odds), ("gauss sweep", gauss_sweep, log_odds),
             ("laplace full fit", full_fit, log_odds)]
    print(f"n={args.n} p={args.p}, best of {args.repeat}")
    print(f"{'case':<18}" + "".join(f"{k.NAME:>12}" for k in backends) + ("     speedup" if len(backends) == 2 else ""))
    for name, make, extra in cases:
        repeat = 1 if name.endswith("fit") else args.repeat
        times = [best_time(make(k, d, order, extra), repeat) for k in backends]
        row = f"{name:<18}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
