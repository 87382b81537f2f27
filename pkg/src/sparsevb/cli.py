"""Command-line front end: ``sparsevb {fit,simulate,compare,diagnose}``.

Result bodies are deterministic under ``--seed``; wall-clock numbers only
appear under a separate ``timing`` key (JSON) or ``runtime_s`` column/rows
(CSV), and ``--no-timing`` drops them altogether.

Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict

import numpy as np
from scipy.linalg import LinAlgError

from ._backend import BACKEND
from .bench import METHODS, ScenarioError, ScenarioSpec, run_scenario
from .cavi import FitConfig, normalize_order
from .core import posterior_mean, precompute
from .diagnostics import EnumerationCapError, compatibility_report
from .noise import estimate_noise_sd, rescale
from .scalar import ScalarOptimError
from .variants import ENGINES, default_prior, fit

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
REPLICATE_HEADER = ("replicate", "l2", "fdr", "tpr", "runtime_s", "sweeps", "converged")
COMPARE_HEADER = ("method", "order", "metric", "mean", "sd")
COMPARE_METRICS = ("l2", "fdr", "tpr", "runtime_s")


class InputError(Exception):
    pass


def fmt(x) -> str:
    """Round-trip float formatting for CSV cells."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % x


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_csv_matrix(path) -> np.ndarray:
    """Numeric CSV to a 2-D array; a non-numeric first row is a header."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    if rows and not all(_is_number(c) for c in rows[0]):
        rows = rows[1:]
    if not rows:
        raise InputError(f"{path}: no data rows")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for r, row in enumerate(rows):
        if len(row) != width:
            raise InputError(f"{path}: ragged row {r + 1} has {len(row)} fields, expected {width}")
        for c, cell in enumerate(row):
            try:
                out[r, c] = float(cell)
            except ValueError:
                raise InputError(f"{path}: non-numeric value {cell!r} at row {r + 1}, "
                                 f"column {c + 1}") from None
    return out


def normalize_design(X) -> np.ndarray:
    """Center each column, rescale it to Euclidean norm sqrt(n), append a column of ones."""
    n = X.shape[0]
    Xc = X - X.mean(axis=0)
    norms = np.linalg.norm(Xc, axis=0)
    const = np.flatnonzero(norms == 0.0)
    if const.size:
        raise InputError(f"--normalize: column {int(const[0]) + 1} is constant")
    return np.hstack([Xc * (math.sqrt(n) / norms), np.ones((n, 1))])


def _emit_json(obj, out):
    text = json.dumps(obj, indent=2, allow_nan=False) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_text(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fit_config(args, seed=None):
    return FitConfig(
        order=args.order,
        seed=args.seed if seed is None else seed,
        epsilon=args.epsilon,
        max_sweeps=args.max_sweeps,
        track_elbo=getattr(args, "track_elbo", False),
    )


def cmd_fit(args):
    X = read_csv_matrix(args.x)
    Y = read_csv_matrix(args.y)
    if Y.shape[1] != 1:
        raise InputError(f"{args.y}: expected a single column, got {Y.shape[1]}")
    if args.normalize:
        X = normalize_design(X)
    try:
        data = precompute(X, Y[:, 0])
    except ValueError as exc:
        raise InputError(str(exc)) from None

    if args.estimate_sigma:
        est = estimate_noise_sd(data, "ridge-df")
    elif args.plugin_sigma is not None:
        est = estimate_noise_sd(data, "plugin", args.plugin_sigma)
    else:
        est = estimate_noise_sd(data, "known", args.known_sigma)
    data = rescale(data, est)

    prior = default_prior(args.engine, data.p, args.lam, args.a0, args.b0, args.slab_sd)
    config = _fit_config(args)
    summary = fit(args.engine, data, prior, config)
    state = summary.state
    result = {
        "schema_version": SCHEMA_VERSION,
        "command": "fit",
        "n": data.n,
        "p": data.p,
        "mu": state.mu.tolist(),
        "sigma": state.sigma.tolist(),
        "gamma": state.gamma.tolist(),
        "posterior_mean": posterior_mean(state).tolist(),
        "selected": (np.flatnonzero(state.gamma > 0.5) + 1).tolist(),
        "sweeps": summary.sweeps,
        "converged": summary.converged,
        "noise": {"method": est.method, "sigma_hat": est.sigma_hat, "df": est.df},
        "config": {
            "engine": args.engine,
            "lambda": args.lam,
            "a0": prior.a0,
            "b0": prior.b0,
            "slab_sd": args.slab_sd,
            "order": config.order,
            "seed": config.seed,
            "epsilon": config.epsilon,
            "max_sweeps": config.max_sweeps,
            "normalize": args.normalize,
        },
    }
    if summary.elbo_trace is not None:
        result["elbo_trace"] = summary.elbo_trace
    if not args.no_timing:
        result["timing"] = {"wall_time_s": summary.wall_time, "backend": BACKEND}
    _emit_json(result, args.out)
    return EXIT_OK


def _load_scenario(args):
    try:
        with open(args.scenario) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {args.scenario}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.scenario}: invalid JSON ({exc})") from None
    spec = ScenarioSpec.from_dict(raw)
    changes = {}
    if args.replicates is not None:
        changes["replicates"] = args.replicates
    if args.seed is not None:
        changes["seed"] = args.seed
    return spec.replace(**changes) if changes else spec


def _report_dict(report, timing):
    d = asdict(report)
    rt = {"runtime_mean_s": d.pop("runtime_mean_s"), "runtime_sd_s": d.pop("runtime_sd_s")}
    return d, rt if timing else None


def replicate_csv(records, timing=True) -> str:
    header = [h for h in REPLICATE_HEADER if timing or h != "runtime_s"]
    lines = [",".join(header)]
    for r in records:
        row = asdict(r)
        lines.append(",".join(fmt(row[h]) for h in header))
    return "\n".join(lines) + "\n"


def cmd_simulate(args):
    spec = _load_scenario(args)
    config = FitConfig(order=args.order, epsilon=args.epsilon, max_sweeps=args.max_sweeps)
    result = run_scenario(spec, args.engine, config, threads=args.threads)
    metrics, timing = _report_dict(result.report, not args.no_timing)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "command": "simulate",
        "scenario": spec.to_dict(),
        "method": args.engine,
        "order": config.order,
        "metrics": metrics,
    }
    if timing is not None:
        summary["timing"] = dict(timing, backend=BACKEND)
    body = replicate_csv(result.records, timing=not args.no_timing)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        _emit_json(summary, os.path.join(args.out_dir, "summary.json"))
        _emit_text(body, os.path.join(args.out_dir, "replicates.csv"))
    else:
        _emit_json(summary, None)
    return EXIT_OK


def _split_list(values, valid, normalize=lambda v: v):
    out = []
    for chunk in values:
        for v in chunk.split(","):
            v = v.strip()
            if not v:
                continue
            v = normalize(v)
            if v not in valid:
                raise InputError(f"unknown choice {v!r}; expected one of {', '.join(valid)}")
            out.append(v)
    return out


def cmd_compare(args):
    spec = _load_scenario(args)
    try:
        orders = _split_list(args.orders or ["prioritized"], ("prioritized", "lexicographic", "randomized"),
                             normalize_order)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    engines = _split_list(args.engines or ["laplace"], METHODS)
    metrics = [m for m in COMPARE_METRICS if not (args.no_timing and m == "runtime_s")]
    lines = [",".join(COMPARE_HEADER)]
    for engine in engines:
        for order in orders:
            config = FitConfig(order=order, epsilon=args.epsilon, max_sweeps=args.max_sweeps)
            report = asdict(run_scenario(spec, engine, config, threads=args.threads).report)
            for m in metrics:
                key = "runtime" if m == "runtime_s" else m
                suffix = "_s" if m == "runtime_s" else ""
                lines.append(",".join([engine, order, m, fmt(report[f"{key}_mean{suffix}"]),
                                       fmt(report[f"{key}_sd{suffix}"])]))
    _emit_text("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_diagnose(args):
    X = read_csv_matrix(args.x)
    if args.normalize:
        X = normalize_design(X)
    try:
        data = precompute(X, np.zeros(X.shape[0]))
        report = compatibility_report(data, args.s_max, args.cap)
    except EnumerationCapError as exc:
        raise InputError(f"{exc}; lower --s-max or raise --cap") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    result = {"schema_version": SCHEMA_VERSION, "command": "diagnose", "n": data.n, "p": data.p}
    result.update(report.to_dict())
    _emit_json(result, args.out)
    return EXIT_OK


def _positive_float(s):
    v = float(s)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _add_fit_controls(p, seed_default):
    p.add_argument("--order", default="prioritized",
                   choices=["prioritized", "lexicographic", "randomized", "lex", "random", "prio"])
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--epsilon", type=_positive_float, default=1e-5)
    p.add_argument("--max-sweeps", type=_positive_int, default=1000)
    p.add_argument("--no-timing", action="store_true",
                   help="omit wall-clock fields so outputs are byte-reproducible")


def build_parser():
    parser = argparse.ArgumentParser(prog="sparsevb",
                                     description="Spike-and-slab variational Bayes for sparse linear regression.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a dataset given as CSV files")
    p.add_argument("--x", required=True, help="design matrix CSV (n rows, p columns)")
    p.add_argument("--y", required=True, help="response CSV (single column)")
    p.add_argument("--engine", default="laplace", choices=ENGINES)
    p.add_argument("--lambda", dest="lam", type=_positive_float, default=1.0)
    p.add_argument("--a0", type=_positive_float, default=1.0)
    p.add_argument("--b0", type=_positive_float, default=None, help="default: p")
    p.add_argument("--slab-sd", type=_positive_float, default=1.0,
                   help="Gaussian slab standard deviation (gauss engines)")
    noise = p.add_mutually_exclusive_group()
    noise.add_argument("--known-sigma", type=_positive_float, default=1.0)
    noise.add_argument("--estimate-sigma", action="store_true",
                       help="estimate the noise sd from a unit-penalty ridge fit")
    noise.add_argument("--plugin-sigma", type=_positive_float, default=None,
                       help="use an externally estimated noise sd")
    p.add_argument("--normalize", action="store_true",
                   help="center columns, scale to norm sqrt(n), append an intercept column")
    p.add_argument("--track-elbo", action="store_true")
    p.add_argument("--out")
    _add_fit_controls(p, 0)
    p.set_defaults(func=cmd_fit)

    for name, func, helptext in (("simulate", cmd_simulate, "run a scenario file"),
                                 ("compare", cmd_compare, "compare orders and engines on a scenario")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--scenario", required=True)
        p.add_argument("--replicates", type=_positive_int, default=None)
        p.add_argument("--threads", type=_positive_int, default=None,
                       help="worker threads (default: SPARSEVB_THREADS or CPU count)")
        _add_fit_controls(p, None)
        if name == "simulate":
            p.add_argument("--engine", default="laplace", choices=METHODS)
            p.add_argument("--out-dir")
        else:
            p.add_argument("--orders", nargs="+", help="e.g. prioritized,lex,random")
            p.add_argument("--engines", nargs="+", help=f"subset of {', '.join(METHODS)}")
            p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("diagnose", help="design diagnostics for a CSV matrix")
    p.add_argument("--x", required=True)
    p.add_argument("--s-max", type=_positive_int, default=3)
    p.add_argument("--cap", type=_positive_int, default=2_000_000,
                   help="maximum number of column subsets to enumerate")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ScenarioError) as exc:
        print(f"sparsevb: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ScalarOptimError, LinAlgError, FloatingPointError, RuntimeError) as exc:
        print(f"sparsevb: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"sparsevb: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"sparsevb: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
