"""Replicated simulation experiments: data generation, fitting and metrics.

Replicate ``k`` of a scenario draws everything from
``numpy.random.default_rng(SeedSequence([seed, k]))``, in the fixed order
design, support, amplitudes, noise, fit seed. A replicate is therefore a
pure function of ``(seed, k)`` and replicates can run in any order or in
parallel without changing results.
"""

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple

import jsonschema
import numpy as np

from .cavi import FitConfig
from .core import GaussianSlab, PriorConfig, posterior_mean, precompute
from .noise import estimate_noise_sd, rescale
from .variants import ENGINES, default_prior, fit

METHODS = ENGINES + ("gauss-oracle",)
PLACEMENTS = ("begin", "middle", "end", "random")

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["n", "p", "s", "design", "signal", "placement", "noise"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "n": {"type": "integer", "minimum": 1},
        "p": {"type": "integer", "minimum": 1},
        "s": {"type": "integer", "minimum": 0},
        "design": {
            "oneOf": [
                {"type": "object", "additionalProperties": False, "required": ["kind"],
                 "properties": {"kind": {"const": "identity"}}},
                {"type": "object", "additionalProperties": False, "required": ["kind"],
                 "properties": {"kind": {"const": "iid_gaussian"},
                                "tau": {"type": "number", "exclusiveMinimum": 0}}},
                {"type": "object", "additionalProperties": False, "required": ["kind", "rho"],
                 "properties": {"kind": {"const": "equicorrelated"},
                                "rho": {"type": "number", "minimum": 0, "exclusiveMaximum": 1}}},
            ]
        },
        "signal": {
            "oneOf": [
                {"type": "object", "additionalProperties": False, "required": ["kind", "value"],
                 "properties": {"kind": {"const": "const"}, "value": {"type": "number"}}},
                {"type": "object", "additionalProperties": False, "required": ["kind", "lo", "hi"],
                 "properties": {"kind": {"const": "uniform"}, "lo": {"type": "number"},
                                "hi": {"type": "number"}}},
                {"type": "object", "additionalProperties": False, "required": ["kind", "values"],
                 "properties": {"kind": {"const": "values"},
                                "values": {"type": "array", "minItems": 1,
                                           "items": {"type": "number"}}}},
            ]
        },
        "placement": {"enum": list(PLACEMENTS)},
        "noise": {
            "oneOf": [
                {"type": "object", "additionalProperties": False, "required": ["kind"],
                 "properties": {"kind": {"const": "gaussian"}, "sd": {"type": "number", "minimum": 0}}},
                {"type": "object", "additionalProperties": False, "required": ["kind"],
                 "properties": {"kind": {"const": "laplace"},
                                "scale": {"type": "number", "exclusiveMinimum": 0}}},
                {"type": "object", "additionalProperties": False, "required": ["kind"],
                 "properties": {"kind": {"const": "uniform"},
                                "half_width": {"type": "number", "exclusiveMinimum": 0}}},
                {"type": "object", "additionalProperties": False, "required": ["kind"],
                 "properties": {"kind": {"const": "student_t3"}}},
            ]
        },
        "known_variance": {"type": "boolean"},
        "noise_estimator": {
            "oneOf": [
                {"const": "ridge-df"},
                {"type": "object", "additionalProperties": False, "required": ["plugin"],
                 "properties": {"plugin": {"type": "number", "exclusiveMinimum": 0}}},
            ]
        },
        "replicates": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "lambda": {"type": "number", "exclusiveMinimum": 0},
        "a0": {"type": "number", "exclusiveMinimum": 0},
        "b0": {"type": ["number", "null"], "exclusiveMinimum": 0},
    },
}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioSpec:
    """Generative description of a replicated experiment.

    ``design``, ``signal`` and ``noise`` are small dicts tagged by ``kind``
    (see ``SCENARIO_SCHEMA``); ``b0=None`` means ``b0 = p``.
    """

    n: int
    p: int
    s: int
    design: dict
    signal: dict
    placement: str
    noise: dict
    known_variance: bool = True
    noise_estimator: object = "ridge-df"
    replicates: int = 1
    seed: int = 0
    lam: float = 1.0
    a0: float = 1.0
    b0: Optional[float] = None
    name: str = ""

    def __post_init__(self):
        if self.s > self.p:
            raise ScenarioError(f"s={self.s} exceeds p={self.p}")
        if self.design["kind"] == "identity" and self.n != self.p:
            raise ScenarioError("identity design needs n == p")
        if self.placement not in PLACEMENTS:
            raise ScenarioError(f"unknown placement {self.placement!r}")

    @classmethod
    def from_dict(cls, d):
        try:
            jsonschema.validate(d, SCENARIO_SCHEMA)
        except jsonschema.ValidationError as exc:
            path = "/".join(str(x) for x in exc.absolute_path) or "<root>"
            raise ScenarioError(f"scenario field {path}: {exc.message}") from None
        kw = dict(d)
        kw.pop("description", None)
        if "lambda" in kw:
            kw["lam"] = kw.pop("lambda")
        return cls(**kw)

    def to_dict(self):
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    def replace(self, **changes):
        d = asdict(self)
        d.update(changes)
        return ScenarioSpec(**d)

    def prior(self, method, theta0=None):
        b0 = float(self.p) if self.b0 is None else self.b0
        if method == "gauss-oracle":
            rho = float(np.linalg.norm(theta0)) if theta0 is not None else 1.0
            return PriorConfig(GaussianSlab(rho if rho > 0 else 1.0), self.a0, b0)
        return default_prior(method, self.p, self.lam, self.a0, b0)


@dataclass
class MetricsReport:
    l2_mean: float
    l2_sd: float
    fdr_mean: float
    fdr_sd: float
    tpr_mean: float
    tpr_sd: float
    runtime_mean_s: float
    runtime_sd_s: float
    replicates_completed: int


@dataclass
class ReplicateRecord:
    replicate: int
    l2: float
    fdr: float
    tpr: float
    runtime_s: float
    sweeps: int
    converged: bool
    sigma_hat: float = 1.0


@dataclass
class ScenarioResult:
    spec: ScenarioSpec
    method: str
    config: FitConfig
    report: MetricsReport
    records: List[ReplicateRecord] = field(default_factory=list)


def replicate_rng(seed, k):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(k)]))


def generate_design(spec: ScenarioSpec, rng) -> np.ndarray:
    kind = spec.design["kind"]
    n, p = spec.n, spec.p
    if kind == "identity":
        if n != p:
            raise ScenarioError("identity design needs n == p")
        return np.eye(n)
    if kind == "iid_gaussian":
        return spec.design.get("tau", 1.0) * rng.standard_normal((n, p))
    if kind == "equicorrelated":
        rho = spec.design["rho"]
        shared = rng.standard_normal((n, 1))
        return math.sqrt(rho) * shared + math.sqrt(1.0 - rho) * rng.standard_normal((n, p))
    raise ScenarioError(f"unknown design {kind!r}")


def support_indices(placement, p, s, rng=None) -> np.ndarray:
    """0-based support; ``middle`` starts at ``(p - s) // 2``."""
    if placement == "begin":
        return np.arange(s)
    if placement == "end":
        return np.arange(p - s, p)
    if placement == "middle":
        start = (p - s) // 2
        return np.arange(start, start + s)
    if placement == "random":
        return np.sort(rng.choice(p, size=s, replace=False))
    raise ScenarioError(f"unknown placement {placement!r}")


def generate_signal(spec: ScenarioSpec, rng) -> Tuple[np.ndarray, np.ndarray]:
    support = support_indices(spec.placement, spec.p, spec.s, rng)
    sig = spec.signal
    if sig["kind"] == "const":
        amp = np.full(spec.s, float(sig["value"]))
    elif sig["kind"] == "uniform":
        amp = rng.uniform(sig["lo"], sig["hi"], size=spec.s)
    else:
        amp = np.resize(np.asarray(sig["values"], dtype=np.float64), spec.s)
    theta0 = np.zeros(spec.p)
    theta0[support] = amp
    return theta0, support


def generate_noise(spec: ScenarioSpec, rng, n) -> np.ndarray:
    noise = spec.noise
    kind = noise["kind"]
    if kind == "gaussian":
        return noise.get("sd", 1.0) * rng.standard_normal(n)
    if kind == "laplace":
        return rng.laplace(0.0, noise.get("scale", 1.0), size=n)
    if kind == "uniform":
        h = noise.get("half_width", 2.0)
        return rng.uniform(-h, h, size=n)
    if kind == "student_t3":
        return rng.standard_t(3, size=n)
    raise ScenarioError(f"unknown noise {kind!r}")


def noise_sd(noise: dict) -> float:
    """Standard deviation of a noise family (used when the variance is known)."""
    kind = noise["kind"]
    if kind == "gaussian":
        return float(noise.get("sd", 1.0))
    if kind == "laplace":
        return math.sqrt(2.0) * noise.get("scale", 1.0)
    if kind == "uniform":
        return noise.get("half_width", 2.0) / math.sqrt(3.0)
    return math.sqrt(3.0)


def metrics(estimate, gamma, theta0) -> Tuple[float, float, float]:
    """``(l2, fdr, tpr)``; coordinate ``i`` is selected when ``gamma_i > 0.5``."""
    estimate = np.asarray(estimate, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    theta0 = np.asarray(theta0, dtype=np.float64)
    if not estimate.shape == gamma.shape == theta0.shape:
        raise ValueError("estimate, gamma and theta0 must have equal lengths")
    selected = gamma > 0.5
    truth = theta0 != 0
    n_sel = int(selected.sum())
    true_pos = int((selected & truth).sum())
    l2 = float(np.linalg.norm(estimate - theta0))
    fdr = (n_sel - true_pos) / max(n_sel, 1)
    tpr = true_pos / max(int(truth.sum()), 1)
    return l2, fdr, tpr


def simulate_replicate(spec: ScenarioSpec, k: int):
    """Data for replicate ``k``: ``(X, Y, theta0, fit_seed)``."""
    rng = replicate_rng(spec.seed, k)
    X = generate_design(spec, rng)
    theta0, _ = generate_signal(spec, rng)
    Z = generate_noise(spec, rng, spec.n)
    fit_seed = int(rng.integers(2 ** 31))
    return X, X @ theta0 + Z, theta0, fit_seed


def run_replicate(spec: ScenarioSpec, method: str, config: FitConfig, k: int) -> ReplicateRecord:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    X, Y, theta0, fit_seed = simulate_replicate(spec, k)
    data = precompute(X, Y)
    if spec.known_variance:
        est = estimate_noise_sd(data, "known", noise_sd(spec.noise) or 1.0)
    elif isinstance(spec.noise_estimator, dict):
        est = estimate_noise_sd(data, "plugin", spec.noise_estimator["plugin"])
    else:
        est = estimate_noise_sd(data, spec.noise_estimator)
    data = rescale(data, est)
    engine = "gauss" if method == "gauss-oracle" else method
    cfg = FitConfig(**{**asdict(config), "seed": fit_seed})
    start = time.perf_counter()
    summary = fit(engine, data, spec.prior(method, theta0), cfg)
    runtime = time.perf_counter() - start
    l2, fdr, tpr = metrics(posterior_mean(summary.state), summary.state.gamma, theta0)
    return ReplicateRecord(k, l2, fdr, tpr, runtime, summary.sweeps, summary.converged,
                           est.sigma_hat)


def _mean_sd(values):
    a = np.asarray(values, dtype=np.float64)
    sd = float(np.std(a, ddof=1)) if a.size > 1 else 0.0
    return float(np.mean(a)), sd


def aggregate(records: List[ReplicateRecord]) -> MetricsReport:
    records = sorted(records, key=lambda r: r.replicate)
    cols = {}
    for name in ("l2", "fdr", "tpr", "runtime_s"):
        cols[name] = _mean_sd([getattr(r, name) for r in records])
    return MetricsReport(*cols["l2"], *cols["fdr"], *cols["tpr"], *cols["runtime_s"], len(records))


def default_threads():
    env = os.environ.get("SPARSEVB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_scenario(spec: ScenarioSpec, method: str = "laplace", config: FitConfig = FitConfig(),
                 threads: Optional[int] = None) -> ScenarioResult:
    """Run every replicate of ``spec`` and aggregate mean and sd of the metrics.

    Fit errors abort the run; the message names the failing replicate.
    """
    threads = default_threads() if threads is None else threads

    def one(k):
        try:
            return run_replicate(spec, method, config, k)
        except Exception as exc:
            raise RuntimeError(f"replicate {k} failed: {exc}") from exc

    ks = range(spec.replicates)
    if threads > 1 and spec.replicates > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(one, ks))
    else:
        records = [one(k) for k in ks]
    return ScenarioResult(spec, method, config, aggregate(records), records)
