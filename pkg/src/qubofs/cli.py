"""Command-line entry point.

Subcommands: `bench friedman`, `bench auto` (full benchmark runs) and
`solve` (standalone QUBO solving from a JSON problem file). Settings resolve
as defaults < JSON config file < explicit flags, and the resolved
configuration is validated before any work starts.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 every
benchmark row failed (or a standalone solve failed).
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from .dataset import (
    MISSING_POLICY_DROP_ANY,
    MISSING_POLICY_IMPUTE,
    DataLoadError,
)
from .evaluation import (
    AutoSource,
    ExperimentConfig,
    FriedmanSource,
    render_report,
    run_experiment,
)
from .metrics import METRIC_VARIANTS, MetricKind
from .qubo import QuboMatrix, QuboProblem
from .samplers import (
    AnnealSchedule,
    RemoteSamplerError,
    best_mask,
    exhaustive_solve,
    remote_sample,
    simulated_anneal,
)
from .selection import SAMPLER_KINDS, SamplerChoice

try:
    __version__ = version("qubofs")
except PackageNotFoundError:
    __version__ = "0.0.0"

_OUTPUT_ALIASES = {
    "md": "markdown", "markdown": "markdown", "csv": "csv", "json": "json",
}

# resolution keys shared by config-file entries and CLI flags
_BENCH_DEFAULTS = {
    "n_samples": 100,
    "n_features": 50,
    "noise_sigma": 1.0,
    "path": None,
    "missing_policy": MISSING_POLICY_IMPUTE,
    "metrics": ["pcc"],
    "models": ["lr", "gbr"],
    "selectors": ["qubo", "greedy", "rfe", "all"],
    "alpha": 1000.0,
    "lam": 10.0,
    "k": 5,
    "sampler": "sa",
    "endpoint": None,
    "timeout_ms": 10_000,
    "shots": 10_000,
    "sweeps": 1000,
    "bootstrap": 10,
    "train_fraction": 0.7,
    "repeats": 3,
    "seed": 0,
    "greedy_fraction": 0.5,
    "rfe_target_k": None,
    "optimal_count": 5,
    "output_format": "markdown",
    "out": None,
}


class CliError(ValueError):
    """Configuration-level failure; maps to exit code 1."""


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qubofs",
        description=(
            "Feature selection by QUBO sampling, benchmarked against "
            "greedy ranking, recursive elimination, and all-features "
            "baselines."
        ),
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run a benchmark experiment")
    bench.add_argument("--version", action="version",
                       version=f"%(prog)s {__version__}")
    bench_sub = bench.add_subparsers(dest="bench_target", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--version", action="version",
                       version=f"%(prog)s {__version__}")
        p.add_argument("--config", metavar="PATH",
                       help="JSON config file; flags override its entries")
        p.add_argument("--metric", metavar="LIST",
                       help="comma list from: pcc, mi, mic, gmic")
        p.add_argument("--model", metavar="LIST",
                       help="comma list from: lr, gbr")
        p.add_argument("--selector", metavar="LIST",
                       help="comma list from: qubo, greedy, rfe, all")
        p.add_argument("--alpha", type=float, help="objective scale")
        p.add_argument("--lambda", dest="lam", type=float,
                       help="cardinality penalty scale")
        p.add_argument("--k", type=int, help="target subset size")
        p.add_argument("--sampler", choices=list(SAMPLER_KINDS))
        p.add_argument("--endpoint", metavar="URL",
                       help="remote sampler URL (required with "
                            "--sampler remote)")
        p.add_argument("--shots", type=int, help="reads per sampler query")
        p.add_argument("--sweeps", type=int,
                       help="annealing sweeps per shot")
        p.add_argument("--bootstrap", type=int,
                       help="sampler queries per selection")
        p.add_argument("--repeats", type=int, help="split repeats")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--output", metavar="FMT",
                       help="report format: md, csv, or json")
        p.add_argument("--out", metavar="PATH",
                       help="write the report here instead of stdout")

    friedman = bench_sub.add_parser(
        "friedman", help="synthetic benchmark with known signal features"
    )
    friedman.add_argument("--samples", dest="n_samples", type=int,
                          help="number of generated rows")
    friedman.add_argument("--features", dest="n_features", type=int,
                          help="number of generated columns")
    friedman.add_argument("--noise", dest="noise_sigma", type=float,
                          help="target noise standard deviation")
    friedman.add_argument("--k-opt", dest="optimal_count", type=int,
                          help="count of leading known-signal features")
    add_common(friedman)

    auto = bench_sub.add_parser(
        "auto", help="automobile price benchmark from a local data file"
    )
    auto.add_argument("--data", dest="path", metavar="PATH",
                      help="imports-85 format data file")
    auto.add_argument("--missing-policy", dest="missing_policy",
                      choices=[MISSING_POLICY_IMPUTE, MISSING_POLICY_DROP_ANY])
    add_common(auto)

    solve = sub.add_parser("solve", help="solve one QUBO from a JSON file")
    solve.add_argument("--version", action="version",
                       version=f"%(prog)s {__version__}")
    solve.add_argument("--qubo", metavar="PATH.json", required=True,
                       help="problem file in the wire-request shape")
    solve.add_argument("--sampler", choices=list(SAMPLER_KINDS), default="sa")
    solve.add_argument("--endpoint", metavar="URL")
    solve.add_argument("--shots", type=int, default=1000)
    solve.add_argument("--sweeps", type=int, default=1000)
    solve.add_argument("--seed", type=int, default=0)
    return parser


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r") as fh:
            loaded = json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(loaded, dict):
        raise CliError("config file must hold a JSON object")
    unknown = sorted(set(loaded) - set(_BENCH_DEFAULTS))
    if unknown:
        raise CliError(f"unknown config file keys: {', '.join(unknown)}")
    return loaded


def _resolve_bench(args: argparse.Namespace) -> dict:
    resolved = dict(_BENCH_DEFAULTS)
    if args.config:
        resolved.update(_load_config_file(args.config))
    flag_keys = (
        "n_samples", "n_features", "noise_sigma", "path", "missing_policy",
        "alpha", "lam", "k", "sampler", "endpoint", "shots", "sweeps",
        "bootstrap", "repeats", "seed", "optimal_count", "out",
    )
    for key in flag_keys:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    if getattr(args, "metric", None) is not None:
        resolved["metrics"] = _csv_list(args.metric)
    if getattr(args, "model", None) is not None:
        resolved["models"] = _csv_list(args.model)
    if getattr(args, "selector", None) is not None:
        resolved["selectors"] = _csv_list(args.selector)
    if getattr(args, "output", None) is not None:
        resolved["output_format"] = args.output
    fmt = resolved["output_format"]
    if fmt not in _OUTPUT_ALIASES:
        raise CliError(f"unknown output format: {fmt!r} (md, csv, json)")
    resolved["output_format"] = _OUTPUT_ALIASES[fmt]
    return resolved


def _validate_bench(resolved: dict, target: str) -> ExperimentConfig:
    if resolved["alpha"] is None or resolved["alpha"] <= 0:
        raise CliError("--alpha must be positive")
    if resolved["lam"] < 0:
        raise CliError("--lambda must be nonnegative")
    if resolved["k"] < 1:
        raise CliError("--k must be at least 1")
    if resolved["shots"] < 1 or resolved["sweeps"] < 1:
        raise CliError("--shots and --sweeps must be at least 1")
    if resolved["bootstrap"] < 1:
        raise CliError("--bootstrap must be at least 1")
    if resolved["repeats"] < 1:
        raise CliError("--repeats must be at least 1")
    if resolved["seed"] < 0:
        raise CliError("--seed must be unsigned")
    if not 0.0 < resolved["train_fraction"] < 1.0:
        raise CliError("train_fraction must lie in (0, 1)")
    if resolved["sampler"] == "remote" and not resolved["endpoint"]:
        raise CliError("--sampler remote requires --endpoint")
    for name in resolved["metrics"]:
        if name not in METRIC_VARIANTS:
            raise CliError(f"unknown metric: {name!r}")

    if target == "friedman":
        if resolved["n_samples"] < 1:
            raise CliError("--samples must be positive")
        if resolved["n_features"] < 5:
            raise CliError("--features must be at least 5")
        if resolved["noise_sigma"] < 0:
            raise CliError("--noise must be nonnegative")
        count = resolved["optimal_count"]
        if not 1 <= count <= resolved["n_features"]:
            raise CliError("--k-opt must lie in [1, features]")
        source = FriedmanSource(
            resolved["n_samples"], resolved["n_features"],
            resolved["noise_sigma"],
        )
        optimal = tuple(range(count))
    else:
        if not resolved["path"]:
            raise CliError("--data is required for bench auto")
        source = AutoSource(resolved["path"], resolved["missing_policy"])
        optimal = None

    sampler = SamplerChoice(
        kind=resolved["sampler"],
        schedule=AnnealSchedule(sweeps=resolved["sweeps"]),
        endpoint=resolved["endpoint"],
        timeout_ms=resolved["timeout_ms"],
    )
    try:
        return ExperimentConfig(
            source=source,
            metrics=tuple(MetricKind(v) for v in resolved["metrics"]),
            models=tuple(resolved["models"]),
            selectors=tuple(resolved["selectors"]),
            alpha=float(resolved["alpha"]),
            lam=float(resolved["lam"]),
            k=int(resolved["k"]),
            sampler=sampler,
            shots=int(resolved["shots"]),
            bootstrap=int(resolved["bootstrap"]),
            train_fraction=float(resolved["train_fraction"]),
            repeats=int(resolved["repeats"]),
            seed=int(resolved["seed"]),
            greedy_fraction=float(resolved["greedy_fraction"]),
            rfe_target_k=resolved["rfe_target_k"],
            optimal_features=optimal,
            output_format=resolved["output_format"],
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
        return
    try:
        with open(out_path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataLoadError(f"cannot write report to {out_path}: {exc}") from exc


def _run_bench(args: argparse.Namespace) -> int:
    resolved = _resolve_bench(args)
    config = _validate_bench(resolved, args.bench_target)
    report = run_experiment(config)
    _emit(render_report(report, config.output_format), resolved["out"])
    if all(row.error is not None for row in report.rows):
        return 3
    return 0


def _load_wire_problem(path: str) -> tuple[QuboProblem, float]:
    """Read a wire-request JSON file into a problem with the penalty already
    folded in (alpha 1, lambda 0); returns the problem and its offset."""
    try:
        with open(path, "r") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise DataLoadError(f"cannot read QUBO file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataLoadError(f"QUBO file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or "linear" not in payload:
        raise DataLoadError("QUBO file must hold an object with 'linear'")
    linear = payload["linear"]
    quadratic = payload.get("quadratic", {})
    offset = float(payload.get("offset", 0.0))
    try:
        indices = [int(i) for i in linear]
        pairs = {}
        for key, value in quadratic.items():
            a, b = (int(t) for t in key.split(","))
            if a >= b:
                raise ValueError(f"quadratic key {key!r} must have i < j")
            pairs[(a, b)] = float(value)
            indices.extend((a, b))
        if not indices:
            raise ValueError("problem has no variables")
        m = max(indices) + 1
        entries = np.zeros((m, m))
        for i, value in linear.items():
            entries[int(i), int(i)] = float(value)
        for (a, b), value in pairs.items():
            entries[a, b] = value
        problem = QuboProblem(QuboMatrix(entries), alpha=1.0, lam=0.0, k=1)
    except (ValueError, TypeError) as exc:
        raise DataLoadError(f"bad QUBO file contents: {exc}") from exc
    return problem, offset


def _run_solve(args: argparse.Namespace) -> int:
    if args.sampler == "remote" and not args.endpoint:
        raise CliError("--sampler remote requires --endpoint")
    if args.shots < 1 or args.sweeps < 1:
        raise CliError("--shots and --sweeps must be at least 1")
    problem, offset = _load_wire_problem(args.qubo)
    try:
        if args.sampler == "exhaustive":
            result = exhaustive_solve(problem)
        elif args.sampler == "remote":
            result = remote_sample(problem, args.endpoint, args.shots)
        else:
            result = simulated_anneal(
                problem, args.shots, AnnealSchedule(sweeps=args.sweeps),
                args.seed,
            )
    except RemoteSamplerError as exc:
        sys.stderr.write(f"solve failed: {exc}\n")
        return 3
    winner = best_mask(result)
    winning_energy = next(
        s.energy for s in result.samples if s.mask == winner
    )
    print(f"best mask: {''.join(str(b) for b in winner.bits)}")
    print(f"selected indices: {list(winner.indices())}")
    print(f"energy: {winning_energy + offset:.6f}")
    print(f"shots: {result.shots}")
    print(f"solve time (us): {result.solve_time_us:.0f}")
    print(f"wall time (us): {result.wall_time_us:.0f}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bench":
            return _run_bench(args)
        return _run_solve(args)
    except CliError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return 1
    except DataLoadError as exc:
        sys.stderr.write(f"data error: {exc}\n")
        return 2


def entrypoint() -> None:
    raise SystemExit(main(sys.argv[1:]))


if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
