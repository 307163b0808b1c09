"""Feature-subset selection strategies.

The QUBO route scores relevancy/redundancy into a quadratic model and asks a
sampler for low-energy masks; the comparison routes are keep-everything,
greedy score ranking, and recursive feature elimination. Every strategy sees
only the training split.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, FeatureMask
from .metrics import MetricKind, mic
from .models import GbrParams, fit_gbr, fit_linear, importance
from .qubo import QuboProblem, build_q
from .samplers import (
    AnnealSchedule,
    SampleSet,
    best_mask,
    exhaustive_solve,
    remote_sample,
    simulated_anneal,
)

SAMPLER_SA = "sa"
SAMPLER_EXHAUSTIVE = "exhaustive"
SAMPLER_REMOTE = "remote"
SAMPLER_KINDS = (SAMPLER_SA, SAMPLER_EXHAUSTIVE, SAMPLER_REMOTE)


@dataclass(frozen=True)
class SamplerChoice:
    """Which sampler backs the QUBO route, plus its backend knobs."""

    kind: str = SAMPLER_SA
    schedule: AnnealSchedule | None = None
    endpoint: str | None = None
    timeout_ms: int = 10_000

    def __post_init__(self) -> None:
        if self.kind not in SAMPLER_KINDS:
            raise ValueError(f"unknown sampler kind: {self.kind!r}")
        if self.kind == SAMPLER_REMOTE and not self.endpoint:
            raise ValueError("remote sampler needs an endpoint URL")


@dataclass(frozen=True)
class SelectionResult:
    mask: FeatureMask
    method_label: str
    select_time_us: float
    metadata: dict

    def __post_init__(self) -> None:
        if self.mask.k < 1:
            raise ValueError("a selection must keep at least one feature")


def _run_sampler(problem: QuboProblem, choice: SamplerChoice, shots: int,
                 seed: int) -> SampleSet:
    if choice.kind == SAMPLER_EXHAUSTIVE:
        return exhaustive_solve(problem)
    if choice.kind == SAMPLER_REMOTE:
        return remote_sample(problem, choice.endpoint, shots, choice.timeout_ms)
    return simulated_anneal(problem, shots, choice.schedule, seed)


def qafs_select(
    train: Dataset,
    metric: MetricKind,
    alpha: float = 1000.0,
    lam: float = 10.0,
    k: int = 1,
    sampler: SamplerChoice | None = None,
    shots: int = 10_000,
    bootstrap: int = 10,
    seed: int = 0,
) -> SelectionResult:
    """QUBO-based selection: bootstrap repeated sampler queries, then keep
    the best mask over the union of every returned sample."""
    if bootstrap < 1:
        raise ValueError("bootstrap count must be at least 1")
    if sampler is None:
        sampler = SamplerChoice()
    problem = QuboProblem(build_q(train, metric), alpha, lam, k)
    pooled = []
    per_bootstrap_best = []
    solve_us = 0.0
    total_shots = 0
    for b in range(bootstrap):
        run_seed = int(
            np.random.SeedSequence(entropy=seed, spawn_key=(b,)).generate_state(1)[0]
        )
        result = _run_sampler(problem, sampler, shots, run_seed)
        pooled.extend(result.samples)
        per_bootstrap_best.append(result.samples[0].energy)
        solve_us += result.solve_time_us
        total_shots += result.shots
    union = SampleSet(
        samples=tuple(
            sorted(pooled, key=lambda s: (s.energy, s.mask.k, s.mask.bits))
        ),
        shots=total_shots,
        solve_time_us=solve_us,
        wall_time_us=solve_us,
    )
    winner = best_mask(union)
    if winner.k == 0:
        nonzero = [s for s in union.samples if s.mask.k > 0]
        if not nonzero:
            raise ValueError("every sampled mask was empty; nothing to select")
        winner = nonzero[0].mask
    winning_energy = next(
        s.energy for s in union.samples if s.mask == winner
    )
    return SelectionResult(
        mask=winner,
        method_label="Q" + metric.variant.upper(),
        select_time_us=solve_us,
        metadata={
            "energy": winning_energy,
            "bootstrap_energies": per_bootstrap_best,
            "shots": total_shots,
        },
    )


def greedy_ranked_select(train: Dataset, fraction: float = 0.5) -> SelectionResult:
    """Rank columns by MIC against the target, keep the top
    max(1, floor(fraction * M)); ties prefer the lower column index."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    t0 = time.perf_counter()
    m = train.n_features
    scores = np.array(
        [mic(train.features[:, i], train.target) for i in range(m)]
    )
    keep = max(1, int(np.floor(fraction * m)))
    # stable sort on negated scores keeps lower indices first among ties
    ranked = np.argsort(-scores, kind="stable")
    chosen = sorted(int(i) for i in ranked[:keep])
    elapsed_us = (time.perf_counter() - t0) * 1e6
    return SelectionResult(
        mask=FeatureMask.from_indices(m, chosen),
        method_label="GR",
        select_time_us=elapsed_us,
        metadata={"scores": [float(s) for s in scores]},
    )


MODEL_LINEAR = "linear"
MODEL_GBR = "gbr"


def rfe_select(
    train: Dataset,
    model_kind: str = MODEL_LINEAR,
    target_k: int | None = None,
    gbr_params: GbrParams | None = None,
) -> SelectionResult:
    """Recursive feature elimination: refit on the survivors and drop the
    single lowest-importance feature until target_k remain."""
    if model_kind not in (MODEL_LINEAR, MODEL_GBR):
        raise ValueError(f"unknown model kind: {model_kind!r}")
    m = train.n_features
    if target_k is None:
        target_k = max(1, m // 2)
    if not 1 <= target_k <= m:
        raise ValueError(f"target_k must lie in [1, {m}]")
    t0 = time.perf_counter()
    remaining = list(range(m))
    eliminated = []
    round_index = 0
    while len(remaining) > target_k:
        x = train.features[:, remaining]
        try:
            if model_kind == MODEL_LINEAR:
                model = fit_linear(x, train.target)
                scores = importance(model, x.std(axis=0))
            else:
                model = fit_gbr(x, train.target, gbr_params)
                scores = importance(model)
        except ValueError as exc:
            raise ValueError(
                f"model fit failed at elimination round {round_index}: {exc}"
            ) from exc
        # argmin returns the first minimum, so ties drop the lower index
        drop = int(np.argmin(scores))
        eliminated.append(remaining.pop(drop))
        round_index += 1
    elapsed_us = (time.perf_counter() - t0) * 1e6
    return SelectionResult(
        mask=FeatureMask.from_indices(m, remaining),
        method_label="RFE",
        select_time_us=elapsed_us,
        metadata={"eliminated": eliminated},
    )


def all_features(train: Dataset) -> SelectionResult:
    """Keep every column; the no-selection baseline."""
    return SelectionResult(
        mask=FeatureMask((1,) * train.n_features),
        method_label="All",
        select_time_us=0.0,
        metadata={},
    )
