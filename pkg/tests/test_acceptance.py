"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are printed together at the
end of the pytest run (and directly when this file is run as a script).
"""

import json
import math
import time
from importlib import resources

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import record_criterion
from oracles import grid_minimize_decoupled
from sparsevb.bench import ScenarioSpec, run_scenario
from sparsevb.cavi import FitConfig, cavi_fit, negative_elbo
from sparsevb.cli import main as cli_main
from sparsevb.core import LaplaceSlab, PriorConfig, precompute
from sparsevb.diagnostics import compatibility_report


def shipped(name) -> ScenarioSpec:
    path = resources.files("sparsevb").joinpath("scenarios", f"{name}.json")
    return ScenarioSpec.from_dict(json.loads(path.read_text()))


def l2(spec, method="laplace", order="prioritized"):
    return run_scenario(spec, method, FitConfig(order=order)).report


def test_criterion_1_update_order_sensitivity():
    start = time.perf_counter()
    begin, middle, rand = (shipped(f"table1_{p}") for p in ("begin", "middle", "random"))
    assert begin.replicates == middle.replicates == rand.replicates == 50
    b_pri, b_lex = l2(begin).l2_mean, l2(begin, order="lexicographic").l2_mean
    m_pri, m_lex = l2(middle).l2_mean, l2(middle, order="lexicographic").l2_mean
    r = l2(rand)
    elapsed = time.perf_counter() - start
    ok_a = b_pri <= 3 and b_lex <= 3
    ok_b = m_lex >= 20 and m_pri <= 3
    ok_c = r.l2_mean <= 3 and r.fdr_mean <= 0.10 and r.tpr_mean >= 0.98
    ok_t = elapsed < 120
    passed = record_criterion(1, ok_a and ok_b and ok_c and ok_t, (
        f"begin prio/lex l2 {b_pri:.2f}/{b_lex:.2f} (<=3); middle lex {m_lex:.2f} (>=20) "
        f"prio {m_pri:.2f} (<=3); random prio l2 {r.l2_mean:.2f} fdr {r.fdr_mean:.3f} "
        f"tpr {r.tpr_mean:.3f}; {elapsed:.0f}s (<120s)"))
    assert passed


def test_criterion_2_laplace_vs_gaussian_slabs():
    start = time.perf_counter()
    spec = shipped("identity_slabs")
    assert (spec.n, spec.p, spec.s, spec.replicates) == (400, 400, 40, 50)
    assert spec.signal["value"] == 4 * math.sqrt(math.log(400))
    lap, gau = l2(spec, "laplace"), l2(spec, "gauss")
    elapsed = time.perf_counter() - start
    ok = (7 <= lap.l2_mean <= 11 and 28 <= gau.l2_mean <= 34
          and all(abs(r.fdr_mean) <= 0.02 and abs(r.tpr_mean - 1) <= 0.02 for r in (lap, gau))
          and lap.l2_mean / gau.l2_mean < 0.4 and elapsed < 300)
    passed = record_criterion(2, ok, (
        f"laplace l2 {lap.l2_mean:.2f} in [7,11]; gauss l2 {gau.l2_mean:.2f} in [28,34]; "
        f"fdr {lap.fdr_mean:.3f}/{gau.fdr_mean:.3f} tpr {lap.tpr_mean:.3f}/{gau.tpr_mean:.3f}; "
        f"ratio {lap.l2_mean / gau.l2_mean:.3f} (<0.4); {elapsed:.0f}s (<300s)"))
    assert passed


def test_criterion_3_qmf_parity():
    spec = shipped("identity_slabs")
    lap, qmf = l2(spec, "laplace"), l2(spec, "qmf")
    diff = abs(lap.l2_mean - qmf.l2_mean)
    passed = record_criterion(3, diff <= 0.5, (
        f"|l2(qmf) - l2(laplace)| = |{qmf.l2_mean:.3f} - {lap.l2_mean:.3f}| = {diff:.4f} (<=0.5)"))
    assert passed


def test_criterion_4_unknown_variance():
    spec = shipped("unknown_variance")
    assert (spec.n, spec.p, spec.s, spec.replicates) == (100, 1000, 3, 30)
    primary = l2(spec)
    if primary.tpr_mean >= 0.95 and primary.l2_mean <= 0.6:
        passed = record_criterion(4, True, (
            f"ridge-df estimator: tpr {primary.tpr_mean:.3f} (>=0.95) l2 {primary.l2_mean:.3f} (<=0.6)"))
    else:
        fallback = l2(spec.replace(noise_estimator={"plugin": 1.0}))
        passed = record_criterion(4, fallback.l2_mean <= 0.5, (
            f"soft: ridge-df missed (tpr {primary.tpr_mean:.3f}, l2 {primary.l2_mean:.3f}); "
            f"plugin(1) rerun l2 {fallback.l2_mean:.3f} (<=0.5) tpr {fallback.tpr_mean:.3f}"))
    assert passed


_c5_worst = []


@settings(max_examples=100, deadline=None, derandomize=True,
          suppress_health_check=[HealthCheck.too_slow])
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(2, 30), p=st.integers(1, 40),
       lam=st.floats(0.1, 5.0))
def _elbo_monotone(seed, n, p, lam):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    theta = np.where(rng.random(p) < 0.2, rng.uniform(-6, 6, p), 0.0)
    d = precompute(X, X @ theta + rng.standard_normal(n))
    prior = PriorConfig(LaplaceSlab(lam), 1.0, float(p))
    values = []
    cavi_fit(d, prior, FitConfig(),
             callback=lambda i, s: values.append(negative_elbo(s, d, prior)))
    v = np.array(values)
    excess = np.diff(v) - 1e-8 * (1 + np.abs(v[:-1]))
    _c5_worst.append(float(excess.max()) if excess.size else -np.inf)
    assert np.all(excess <= 0)


def test_criterion_5_elbo_monotone_per_update():
    _c5_worst.clear()
    try:
        _elbo_monotone()
        ok = True
    finally:
        worst = max(_c5_worst) if _c5_worst else float("nan")
    passed = record_criterion(5, ok, (
        f"{len(_c5_worst)} random instances; max increase over tolerance {worst:.3g} (<=0)"))
    assert passed


_c6_worst = []


@settings(max_examples=20, deadline=None, derandomize=True)
@given(y=st.lists(st.floats(-10, 10), min_size=5, max_size=5))
def _decoupled_oracle(y):
    prior = PriorConfig(LaplaceSlab(1.0), 1.0, 5.0)
    r = cavi_fit(precompute(np.eye(5), y), prior)
    err = 0.0
    for i in range(5):
        ref = grid_minimize_decoupled(y[i], 1.0, prior.w_bar)
        got = np.array([r.state.mu[i], r.state.sigma[i], r.state.gamma[i]])
        err = max(err, float(np.max(np.abs(got - ref))))
    _c6_worst.append(err)
    assert err <= 1e-3


def test_criterion_6_decoupled_grid_oracle():
    _c6_worst.clear()
    _decoupled_oracle()
    passed = record_criterion(6, True, (
        f"{len(_c6_worst)} responses on X=I5; max parameter error vs grid {max(_c6_worst):.2e} (<=1e-3)"))
    assert passed


def test_criterion_7_diagnostics_exactness():
    rng = np.random.default_rng(7)
    worst = np.inf
    for _ in range(200):
        n, p = int(rng.integers(5, 31)), int(rng.integers(2, 13))
        X = rng.standard_normal((n, p)) * rng.uniform(0.1, 5, p)
        if rng.random() < 0.2:
            X[:, -1] = X[:, 0] * rng.uniform(0.5, 2) + 1e-3 * rng.standard_normal(n)
        d = precompute(X, np.zeros(n))
        rep = compatibility_report(d, 3)  # raises on a violated bound
        phi1 = rep.phi_tilde[1]
        for s, v in rep.phi_tilde.items():
            worst = min(worst, v ** 2 - (phi1 ** 2 - s * rep.mc))
    ident = compatibility_report(precompute(np.eye(8), np.zeros(8)), 3)
    ident_ok = ident.mc == 0.0 and all(v == 1.0 for v in ident.phi_tilde.values())
    passed = record_criterion(7, worst >= -1e-9 and ident_ok, (
        f"200 random designs, min slack phi^2 - (phi1^2 - s mc) = {worst:.3g} (>=-1e-9); "
        f"identity mc={ident.mc} phi_tilde={sorted(set(ident.phi_tilde.values()))}"))
    assert passed


def _run_twice(argv_for, tmp_path, tag):
    bodies = []
    for k in (0, 1):
        out = tmp_path / f"{tag}{k}"
        assert cli_main(argv_for(out)) == 0
        if out.is_dir():
            bodies.append({f.name: f.read_bytes() for f in sorted(out.iterdir())})
        else:
            bodies.append(out.read_bytes())
    return bodies[0] == bodies[1]


def test_criterion_8_cli_determinism(tmp_path):
    rng = np.random.default_rng(8)
    X = rng.standard_normal((30, 20))
    xs, ys = tmp_path / "x.csv", tmp_path / "y.csv"
    xs.write_text("\n".join(",".join("%.17g" % v for v in row) for row in X) + "\n")
    ys.write_text("\n".join("%.17g" % v for v in X[:, 2] * 5 + rng.standard_normal(30)) + "\n")
    scen = tmp_path / "s.json"
    spec = shipped("table1_random").replace(n=40, p=60, s=5, replicates=4)
    scen.write_text(json.dumps(spec.to_dict()))
    common = ["--no-timing"]
    checks = {
        "fit": _run_twice(lambda o: ["fit", "--x", str(xs), "--y", str(ys), "--order", "random",
                                     "--seed", "7", "--estimate-sigma", "--track-elbo",
                                     "--out", str(o)] + common, tmp_path, "fit"),
        "simulate": _run_twice(lambda o: ["simulate", "--scenario", str(scen), "--order", "random",
                                          "--out-dir", str(o)] + common, tmp_path, "sim"),
        "compare": _run_twice(lambda o: ["compare", "--scenario", str(scen), "--orders",
                                         "prioritized,lex,random", "--engines", "laplace,qmf,gauss",
                                         "--out", str(o)] + common, tmp_path, "cmp"),
        "diagnose": _run_twice(lambda o: ["diagnose", "--x", str(xs), "--s-max", "2", "--out", str(o)],
                               tmp_path, "diag"),
    }
    passed = record_criterion(8, all(checks.values()), "byte-identical bodies: " + ", ".join(
        f"{k}={'yes' if v else 'NO'}" for k, v in checks.items()))
    assert passed


def test_criterion_9_noise_robustness():
    parts, ok = [], True
    for family in ("gaussian", "laplace", "uniform", "student_t3"):
        spec = shipped(f"noise_{family}")
        assert (spec.n, spec.p, spec.s, spec.replicates) == (100, 200, 10, 30)
        r = l2(spec)
        tpr_min = 0.8 if family == "student_t3" else 0.9
        good = r.tpr_mean >= tpr_min and r.fdr_mean <= 0.05
        ok &= good
        parts.append(f"{family} tpr {r.tpr_mean:.3f} (>={tpr_min}) fdr {r.fdr_mean:.3f} (<=0.05)")
    passed = record_criterion(9, ok, "; ".join(parts))
    assert passed


if __name__ == "__main__":
    import sys

    import pytest

    sys.exit(pytest.main([__file__, "-q"]))
