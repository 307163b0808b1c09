"""Benchmark orchestration: score selections and run the full comparison.

For every split repeat, each configured selector picks a column subset on the
train rows; each configured model is then fit on those columns and scored by
test MAE. Rows aggregate mean and spread across repeats.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import (
    MISSING_POLICY_IMPUTE,
    Dataset,
    SplitPlan,
    filter_columns,
    generate_friedman1,
    load_auto_csv,
    split,
)
from .metrics import MetricKind
from .models import (
    GbrParams,
    fit_gbr,
    fit_linear,
    mae,
    predict_gbr,
    predict_linear,
)
from .selection import (
    SamplerChoice,
    SelectionResult,
    all_features,
    greedy_ranked_select,
    qafs_select,
    rfe_select,
)

MODEL_NAMES = ("lr", "gbr")
SELECTOR_NAMES = ("qubo", "greedy", "rfe", "all")
OUTPUT_FORMATS = ("markdown", "csv", "json")


@dataclass(frozen=True)
class FriedmanSource:
    n_samples: int = 100
    n_features: int = 50
    noise_sigma: float = 1.0


@dataclass(frozen=True)
class AutoSource:
    path: str
    missing_policy: str = MISSING_POLICY_IMPUTE


@dataclass(frozen=True)
class ExperimentConfig:
    source: FriedmanSource | AutoSource
    metrics: tuple[MetricKind, ...] = (MetricKind("pcc"),)
    models: tuple[str, ...] = MODEL_NAMES
    selectors: tuple[str, ...] = SELECTOR_NAMES
    alpha: float = 1000.0
    lam: float = 10.0
    k: int = 5
    sampler: SamplerChoice = field(default_factory=SamplerChoice)
    shots: int = 10_000
    bootstrap: int = 10
    train_fraction: float = 0.7
    repeats: int = 3
    seed: int = 0
    gbr_params: GbrParams = field(default_factory=GbrParams)
    greedy_fraction: float = 0.5
    rfe_target_k: int | None = None
    optimal_features: tuple[int, ...] | None = None
    output_format: str = "markdown"

    def __post_init__(self) -> None:
        if not self.metrics or not self.models or not self.selectors:
            raise ValueError("need at least one metric, model, and selector")
        for name in self.models:
            if name not in MODEL_NAMES:
                raise ValueError(f"unknown model name: {name!r}")
        for name in self.selectors:
            if name not in SELECTOR_NAMES:
                raise ValueError(f"unknown selector name: {name!r}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"unknown output format: {self.output_format!r}")


@dataclass(frozen=True)
class RepeatRecord:
    """One row's result on one split repeat."""

    repeat: int
    mask_indices: tuple[int, ...]
    mae: float
    subset_accuracy: float | None
    predictions: tuple[float, ...]


@dataclass(frozen=True)
class ReportRow:
    label: str
    mae_mean: float
    mae_std: float
    k_mean: float
    subset_accuracy_mean: float | None
    select_time_us: float | None
    wall_time_us: float
    per_repeat: tuple[RepeatRecord, ...]
    error: str | None = None


@dataclass(frozen=True)
class ExperimentReport:
    rows: tuple[ReportRow, ...]
    n_features: int
    n_repeats: int
    repeat_targets: tuple[tuple[float, ...], ...]
    config_summary: dict


def subset_accuracy(selected, optimal) -> float:
    """Average of overlap score and size-match score against a known-optimal
    index set; the size score is floored at zero."""
    sel = set(int(i) for i in selected)
    opt = set(int(i) for i in optimal)
    if not opt:
        raise ValueError("optimal index set must be non-empty")
    hit = len(sel & opt) / len(opt)
    length = max(0.0, 1.0 - abs(len(sel) - len(opt)) / len(opt))
    return (hit + length) / 2.0


def _load_source(config: ExperimentConfig) -> Dataset:
    if isinstance(config.source, FriedmanSource):
        s = config.source
        return generate_friedman1(
            s.n_samples, s.n_features, s.noise_sigma, seed=config.seed
        )
    return load_auto_csv(config.source.path, config.source.missing_policy)


def _fit_and_score(model_name: str, train: Dataset, test: Dataset,
                   gbr_params: GbrParams) -> tuple[np.ndarray, float]:
    if model_name == "lr":
        model = fit_linear(train.features, train.target)
        pred = predict_linear(model, test.features)
    else:
        model = fit_gbr(train.features, train.target, gbr_params)
        pred = predict_gbr(model, test.features)
    return pred, mae(pred, test.target)


def _selection_jobs(config: ExperimentConfig):
    """Expand configured selectors into (label_prefix, runner, models) jobs.

    Shared-filter selectors feed every configured model from one mask; RFE
    wraps each model separately, so it becomes one job per model.
    """
    jobs = []
    for selector in config.selectors:
        if selector == "qubo":
            for mi, metric in enumerate(config.metrics):
                def run_qubo(train, rep, _metric=metric, _mi=mi):
                    run_seed = int(
                        np.random.SeedSequence(
                            entropy=config.seed, spawn_key=(rep, _mi)
                        ).generate_state(1)[0]
                    )
                    return qafs_select(
                        train, _metric, config.alpha, config.lam, config.k,
                        config.sampler, config.shots, config.bootstrap,
                        seed=run_seed,
                    )
                jobs.append(("Q" + metric.variant.upper(), run_qubo,
                             config.models))
        elif selector == "greedy":
            def run_greedy(train, rep):
                return greedy_ranked_select(train, config.greedy_fraction)
            jobs.append(("GR", run_greedy, config.models))
        elif selector == "all":
            def run_all(train, rep):
                return all_features(train)
            jobs.append(("All", run_all, config.models))
        else:
            for model_name in config.models:
                kind = "linear" if model_name == "lr" else "gbr"
                def run_rfe(train, rep, _kind=kind):
                    return rfe_select(train, _kind, config.rfe_target_k,
                                      config.gbr_params)
                jobs.append(("RFE", run_rfe, (model_name,)))
    return jobs


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Execute the benchmark; a failing row is recorded and skipped, the
    remaining rows still run."""
    dataset = _load_source(config)
    plan = SplitPlan(config.train_fraction, config.repeats, config.seed)
    pairs = split(dataset, plan)
    jobs = _selection_jobs(config)

    labels: list[str] = []
    records: dict[str, list] = {}
    select_us: dict[str, list] = {}
    wall_us: dict[str, list] = {}
    failures: dict[str, str] = {}
    for prefix, _, models in jobs:
        for model_name in models:
            label = f"{prefix}-{model_name.upper()}"
            labels.append(label)
            records[label] = []
            select_us[label] = []
            wall_us[label] = []

    for rep, (train, test) in enumerate(pairs):
        for prefix, runner, models in jobs:
            row_labels = [f"{prefix}-{m.upper()}" for m in models]
            live = [lb for lb in row_labels if lb not in failures]
            if not live:
                continue
            wall0 = time.perf_counter()
            try:
                selection: SelectionResult = runner(train, rep)
            except Exception as exc:
                for lb in live:
                    failures[lb] = f"repeat {rep}: {exc}"
                continue
            select_wall_us = (time.perf_counter() - wall0) * 1e6
            kept_train = filter_columns(train, selection.mask)
            kept_test = filter_columns(test, selection.mask)
            accuracy = None
            if config.optimal_features is not None:
                accuracy = subset_accuracy(
                    selection.mask.indices(), config.optimal_features
                )
            for model_name in models:
                label = f"{prefix}-{model_name.upper()}"
                if label in failures:
                    continue
                model0 = time.perf_counter()
                try:
                    pred, err = _fit_and_score(
                        model_name, kept_train, kept_test, config.gbr_params
                    )
                except Exception as exc:
                    failures[label] = f"repeat {rep}: {exc}"
                    continue
                model_us = (time.perf_counter() - model0) * 1e6
                records[label].append(RepeatRecord(
                    repeat=rep,
                    mask_indices=selection.mask.indices(),
                    mae=err,
                    subset_accuracy=accuracy,
                    predictions=tuple(float(p) for p in pred),
                ))
                select_us[label].append(selection.select_time_us)
                wall_us[label].append(select_wall_us + model_us)

    rows = []
    for label in labels:
        if label in failures:
            rows.append(ReportRow(
                label=label, mae_mean=float("nan"), mae_std=float("nan"),
                k_mean=float("nan"), subset_accuracy_mean=None,
                select_time_us=None, wall_time_us=0.0, per_repeat=(),
                error=failures[label],
            ))
            continue
        recs = records[label]
        maes = np.array([r.mae for r in recs])
        ks = np.array([len(r.mask_indices) for r in recs])
        accs = [r.subset_accuracy for r in recs]
        acc_mean = (
            float(np.mean(accs)) if accs and accs[0] is not None else None
        )
        is_all_row = label.startswith("All-")
        rows.append(ReportRow(
            label=label,
            mae_mean=float(maes.mean()),
            mae_std=float(maes.std()),
            k_mean=float(ks.mean()),
            subset_accuracy_mean=acc_mean,
            select_time_us=(
                None if is_all_row else float(np.mean(select_us[label]))
            ),
            wall_time_us=float(np.mean(wall_us[label])),
            per_repeat=tuple(recs),
            error=None,
        ))

    summary = {
        "dataset": (
            {
                "kind": "friedman",
                "n_samples": config.source.n_samples,
                "n_features": config.source.n_features,
                "noise_sigma": config.source.noise_sigma,
            }
            if isinstance(config.source, FriedmanSource)
            else {
                "kind": "auto",
                "path": config.source.path,
                "missing_policy": config.source.missing_policy,
            }
        ),
        "metrics": [m.variant for m in config.metrics],
        "models": list(config.models),
        "selectors": list(config.selectors),
        "alpha": config.alpha,
        "lambda": config.lam,
        "k": config.k,
        "sampler": config.sampler.kind,
        "shots": config.shots,
        "bootstrap": config.bootstrap,
        "train_fraction": config.train_fraction,
        "repeats": config.repeats,
        "seed": config.seed,
    }
    return ExperimentReport(
        rows=tuple(rows),
        n_features=dataset.n_features,
        n_repeats=config.repeats,
        repeat_targets=tuple(
            tuple(float(v) for v in test.target) for _, test in pairs
        ),
        config_summary=summary,
    )


def _fmt_opt(value: float | None, spec: str) -> str:
    return "-" if value is None else format(value, spec)


def render_report(report: ExperimentReport, output_format: str) -> str:
    """Markdown and CSV carry the headline numbers plus timings; JSON carries
    full per-repeat detail but no measured wall-clock timings, so reruns with
    one seed are byte-identical."""
    if output_format == "markdown":
        lines = [
            "| FS method | MAE | k | SA | select time (us) | wall time (us) |",
            "| --- | --- | --- | --- | --- | --- |",
        ]
        for row in report.rows:
            if row.error is not None:
                lines.append(f"| {row.label} | failed: {row.error} | | | | |")
                continue
            lines.append(
                f"| {row.label} "
                f"| {row.mae_mean:.2f} +/- {row.mae_std:.2f} "
                f"| {row.k_mean:.1f} "
                f"| {_fmt_opt(row.subset_accuracy_mean, '.2f')} "
                f"| {_fmt_opt(row.select_time_us, '.0f')} "
                f"| {row.wall_time_us:.0f} |"
            )
        return "\n".join(lines) + "\n"
    if output_format == "csv":
        lines = [
            "method,mae_mean,mae_std,k_mean,subset_accuracy,"
            "select_time_us,wall_time_us,error"
        ]
        for row in report.rows:
            if row.error is not None:
                safe = row.error.replace('"', "'")
                lines.append(f'{row.label},,,,,,,"{safe}"')
                continue
            acc = row.subset_accuracy_mean
            sel = row.select_time_us
            lines.append(",".join([
                row.label,
                f"{row.mae_mean:.2f}",
                f"{row.mae_std:.2f}",
                f"{row.k_mean:.1f}",
                f"{acc:.2f}" if acc is not None else "",
                f"{sel:.0f}" if sel is not None else "",
                f"{row.wall_time_us:.0f}",
                "",
            ]))
        return "\n".join(lines) + "\n"
    if output_format == "json":
        payload = {
            "config": report.config_summary,
            "n_features": report.n_features,
            "n_repeats": report.n_repeats,
            "repeat_targets": [list(t) for t in report.repeat_targets],
            "rows": [
                {
                    "label": row.label,
                    "error": row.error,
                    "mae_mean": row.mae_mean,
                    "mae_std": row.mae_std,
                    "k_mean": row.k_mean,
                    "subset_accuracy_mean": row.subset_accuracy_mean,
                    "per_repeat": [
                        {
                            "repeat": r.repeat,
                            "mask_indices": list(r.mask_indices),
                            "mae": r.mae,
                            "subset_accuracy": r.subset_accuracy,
                            "predictions": list(r.predictions),
                        }
                        for r in row.per_repeat
                    ],
                }
                if row.error is None
                else {"label": row.label, "error": row.error}
                for row in report.rows
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown output format: {output_format!r}")
