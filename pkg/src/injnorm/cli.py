"""Command-line driver: ``injnorm {bound,estimate,verify,cover,sweep,lemmas}``.

Options resolve as flag, then ``--config`` JSON key, then built-in default.
Exit codes: 0 success, 1 failed verdict, 2 usage or input error.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from ._io import csv_text, dumps, read_json
from .bounds import (
    bvh_matrix_bound,
    corollary_bound,
    latala_matrix_terms,
    remark_lower_bound,
    theorem_upper_bound,
)
from .chaining_lab import (
    FiniteMetricSpace,
    ball_sample,
    build_admissible_sequence,
    dudley_estimate,
    eta_distance_matrix,
    greedy_cover_number,
    maurey_sparsify,
    sample_size,
)
from .experiments import (
    RunConfig,
    lemma_sweep,
    random_metric_space,
    run_monte_carlo,
    scaling_sweep,
    ultrametric_check,
)
from .inj_norm import EstimatorConfig, grid_oracle
from .random_models import ModelSpec, SampleSeed
from .tensor_core import CoeffTensor, TensorFormatError

log = logging.getLogger("injnorm")

EXIT_OK, EXIT_VERDICT, EXIT_USAGE = 0, 1, 2
ORACLE_MAX_DIM = 4


class InputError(Exception):
    """Bad input; ``field`` names the offending option or JSON field."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def _available_workers():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def _int_list(text):
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


# name: (type, default, help); defaults are applied after the config file
OPTIONS = {
    "input": (str, None, "input JSON file (tensor, model or metric space)"),
    "out": (str, None, "output file; stdout when omitted"),
    "seed": (int, None, "master seed; required for stochastic subcommands"),
    "trials": (int, 100, "number of Monte Carlo trials"),
    "starts": (int, None, "alternating-maximization random starts; None means 4 r ceil(ln(d+1))"),
    "constant": (float, 1.0, "universal constant C in the bound formulas"),
    "epsilon": (float, 0.5, "epsilon for the matrix bound, covers and sparsification"),
    "workers": (int, None, "worker processes; None means all available CPUs"),
    "model": (str, "gaussian", "model variant: gaussian, bounded or bernoulli"),
    "K": (float, 1.0, "almost-sure bound for the bounded model"),
    "resolution": (float, 0.05, "grid-oracle resolution for tiny instances (r <= 3, d <= 4)"),
    "exact_matrix": (bool, False, "use the exact spectral norm when r = 2"),
    "sweep": (int, 500, "instances per lemma sweep"),
    "points": (int, 200, "random ball points when covering a tensor's eta metric"),
    "d_list": (_int_list, [10, 25, 50], "comma-separated dimensions for the scaling sweep"),
    "r_list": (_int_list, [1, 2], "comma-separated orders for the scaling sweep"),
}

SUBCOMMANDS = {
    "bound": ("evaluate every bound formula for a coefficient tensor",
              ["input", "out", "config", "model", "K", "constant", "epsilon"]),
    "estimate": ("Monte Carlo report of certified norm estimates",
                 ["input", "out", "config", "model", "K", "seed", "trials", "starts",
                  "constant", "workers", "exact_matrix"]),
    "verify": ("run the report and fail (exit 1) on any false verdict",
               ["input", "out", "config", "model", "K", "seed", "trials", "starts",
                "constant", "workers", "exact_matrix", "resolution"]),
    "cover": ("greedy covers, Dudley sum, admissible sequence and a sparsification demo",
              ["input", "out", "config", "seed", "epsilon", "points"]),
    "sweep": ("scaling table of mean certificate against sqrt(d) for b = 1",
              ["out", "config", "seed", "trials", "starts", "workers", "d_list", "r_list"]),
    "lemmas": ("property sweeps for the Lipschitz and ultrametric lemmas",
               ["out", "config", "seed", "sweep"]),
}
STOCHASTIC = {"estimate", "verify", "sweep", "lemmas"}


def _add_option(parser, name):
    if name == "config":
        parser.add_argument("--config", default=None,
                            help="JSON file of option values, overridden by flags (default: None)")
        return
    kind, default, text = OPTIONS[name]
    flag = "--" + name.replace("_", "-")
    help_text = f"{text} (default: {default})"
    if kind is bool:
        parser.add_argument(flag, dest=name, action="store_const", const=True, default=None,
                            help=help_text)
    else:
        parser.add_argument(flag, dest=name, type=kind, default=None, help=help_text)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="injnorm",
        description="Bounds and Monte Carlo checks for injective norms of random tensors.",
        epilog="Set INJNORM_LOG to error, info or debug for log output on stderr.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    for name, (text, options) in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=text, description=text)
        for opt in options:
            _add_option(p, opt)
    return parser


def _resolve(args):
    """Merge flags over the config file over defaults into a plain dict."""
    names = SUBCOMMANDS[args.command][1]
    config = {}
    if getattr(args, "config", None):
        config = _read(args.config, "config")
        if not isinstance(config, dict):
            raise InputError("config", "expected a JSON object")
        for key in config:
            if key not in names or key == "config":
                raise InputError(key, f"unknown option for '{args.command}' in the config file")
    opts = {}
    for name in names:
        if name == "config":
            continue
        kind, default, _ = OPTIONS[name]
        value = getattr(args, name)
        if value is None and name in config:
            value = config[name]
            try:
                value = _coerce(kind, value)
            except (TypeError, ValueError, argparse.ArgumentTypeError):
                raise InputError(name, f"invalid config value {value!r}") from None
        opts[name] = default if value is None else value
    if args.command in STOCHASTIC and opts.get("seed") is None:
        raise InputError("seed", "--seed is required for this subcommand")
    return opts


def _coerce(kind, value):
    if kind is _int_list:
        return [int(v) for v in value] if isinstance(value, list) else _int_list(value)
    if kind is bool:
        if not isinstance(value, bool):
            raise ValueError(value)
        return value
    if kind is int and (isinstance(value, bool) or int(value) != value):
        raise ValueError(value)
    return kind(value)


def _read(path, field):
    try:
        return read_json(path)
    except OSError as exc:
        raise InputError(field, f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(field, f"invalid JSON in {path}: {exc.msg}") from None


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _load_model(opts):
    if opts["input"] is None:
        raise InputError("input", "--input is required")
    data = _read(opts["input"], "input")
    if isinstance(data, dict) and "variant" in data:
        return ModelSpec.from_dict(data)
    tensor = CoeffTensor.from_dict(data)
    try:
        return ModelSpec(opts["model"], tensor, opts["K"])
    except ValueError as exc:
        raise InputError("model", str(exc)) from None


def _cmd_bound(opts):
    model = _load_model(opts)
    r, d, C = model.order, model.dim, opts["constant"]
    std = model.std_tensor()
    out = {
        "r": r,
        "d": d,
        "variant": model.variant,
        "stats": std.stats.to_dict(),
        "remark_lower_bound": remark_lower_bound(std.stats),
    }
    if model.variant == "gaussian":
        out["theorem_upper_bound"] = theorem_upper_bound(std.stats, r, d, C).to_dict()
        out["total"] = out["theorem_upper_bound"]["total"]
        if r == 2:
            out["bvh_matrix_bound"] = bvh_matrix_bound(std.stats, d, opts["epsilon"]).to_dict()
            out["latala_terms"] = list(latala_matrix_terms(std))
    else:
        out["corollary_bound"] = corollary_bound(std.stats, r, d, model.K, C).to_dict()
        out["total"] = out["corollary_bound"]["total"]
    _emit(dumps(out), opts["out"])
    return EXIT_OK


def _report(opts):
    model = _load_model(opts)
    cfg = RunConfig(
        model=model,
        trials=opts["trials"],
        estimator=EstimatorConfig(num_starts=opts["starts"]),
        master_seed=opts["seed"],
        bound_constant_C=opts["constant"],
        exact_matrix=opts["exact_matrix"],
    )
    workers = opts["workers"] or _available_workers()
    return cfg, run_monte_carlo(cfg, workers)


def _cmd_estimate(opts):
    _, report = _report(opts)
    _emit(dumps(report.to_dict()), opts["out"])
    return EXIT_OK


def _oracle_verdict(cfg, report, resolution):
    """Certificates never exceed the grid oracle plus its discretization slack."""
    model = cfg.model
    worst = np.inf
    for rec in report.trials:
        X = model.sample(SampleSeed(cfg.master_seed, rec.trial_index))
        slack = float(np.linalg.norm(X.array)) * resolution * np.pi * X.order
        worst = min(worst, grid_oracle(X, resolution) + slack + 1e-9 - rec.norm_estimate)
    return {"holds": bool(worst >= 0), "margin": float(worst)}


def _cmd_verify(opts):
    cfg, report = _report(opts)
    verdicts = report.verdicts
    if cfg.model.order <= 3 and cfg.model.dim <= ORACLE_MAX_DIM:
        verdicts["oracle_holds"] = _oracle_verdict(cfg, report, opts["resolution"])
    _emit(dumps(report.to_dict()), opts["out"])
    failed = False
    for name, v in verdicts.items():
        status = "PASS" if v["holds"] else "FAIL"
        print(f"{status} {name} margin={v['margin']:.6g}", file=sys.stderr)
        failed |= not v["holds"]
    return EXIT_VERDICT if failed else EXIT_OK


def _load_space(opts):
    if opts["input"] is None:
        raise InputError("input", "--input is required")
    data = _read(opts["input"], "input")
    if isinstance(data, dict) and "dist" in data:
        return FiniteMetricSpace.from_dict(data), None
    tensor = CoeffTensor.from_dict(data)
    if opts["seed"] is None:
        raise InputError("seed", "--seed is required to sample the ball for a tensor input")
    pts = ball_sample(tensor.dim, opts["points"], SampleSeed(opts["seed"]))
    return FiniteMetricSpace(eta_distance_matrix(tensor, 1, pts)), tensor


def _cmd_cover(opts):
    space, tensor = _load_space(opts)
    eps = opts["epsilon"]
    size, centers = greedy_cover_number(space, eps)
    _, functional = build_admissible_sequence(space)
    out = {
        "n": space.n,
        "diameter": space.diameter,
        "epsilon": eps,
        "cover_size": size,
        "cover": centers,
        "dudley_estimate": dudley_estimate(space),
        "admissible_functional": functional,
    }
    if tensor is not None:
        out["eta_axis"] = 1
    if opts["seed"] is not None:
        rng = SampleSeed(opts["seed"]).generator(41)
        d0 = 16
        S = rng.random((6, d0))
        w = rng.dirichlet(np.ones(6))
        res = maurey_sparsify(None, w, S, d0, eps, SampleSeed(opts["seed"]))
        out["maurey"] = {"d0": d0, "n": res.n, "expected_n": sample_size(d0, eps),
                         "attempts": res.attempts, "error": res.error}
    _emit(dumps(out), opts["out"])
    return EXIT_OK


def _cmd_sweep(opts):
    header, rows = scaling_sweep(
        opts["d_list"], opts["r_list"], opts["trials"], opts["seed"],
        EstimatorConfig(num_starts=opts["starts"]), opts["workers"] or _available_workers(),
    )
    _emit(csv_text(header, rows), opts["out"])
    return EXIT_OK


def _cmd_lemmas(opts):
    seed = SampleSeed(opts["seed"])
    sweep = lemma_sweep(opts["sweep"], seed)
    rng = seed.generator(51)
    checks = [ultrametric_check(random_metric_space(32, rng)) for _ in range(5)]
    out = {"lemma_sweep": sweep, "ultrametric_checks": checks}
    print(f"tau residual min {sweep['tau_min_residual']:.3e}")
    print(f"diag residual min {sweep['diag_min_residual']:.3e}")
    print(f"sqrt gap grid all true: {sweep['sqrt_gap_all_true']}")
    print(f"ultrametric checks passed: {sum(c['holds'] for c in checks)}/{len(checks)}")
    if opts["out"] is not None:
        _emit(dumps(out), opts["out"])
    return EXIT_OK if sweep["holds"] and all(c["holds"] for c in checks) else EXIT_VERDICT


COMMANDS = {
    "bound": _cmd_bound,
    "estimate": _cmd_estimate,
    "verify": _cmd_verify,
    "cover": _cmd_cover,
    "sweep": _cmd_sweep,
    "lemmas": _cmd_lemmas,
}


def _configure_logging():
    level = os.environ.get("INJNORM_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def dispatch(argv=None):
    """Run one subcommand; returns the exit code instead of exiting."""
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        opts = _resolve(args)
        return COMMANDS[args.command](opts)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except TensorFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_USAGE


def main(argv=None):
    sys.exit(dispatch(argv))
