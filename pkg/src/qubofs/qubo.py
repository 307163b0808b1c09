"""Build the selection QUBO (relevancy on the diagonal, redundancy above it)
and evaluate the scaled, cardinality-penalized objective."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .dataset import Dataset, FeatureMask
from .metrics import MetricKind, distance


@dataclass(frozen=True)
class QuboMatrix:
    """Upper-triangular coefficient matrix; the lower triangle is identically 0.

    Matrices built by build_q additionally satisfy diagonal <= 0 and strict
    upper >= 0; penalty-expanded and wire-transported matrices hold general
    reals, so those sign properties are not enforced here.
    """

    entries: NDArray[np.float64]

    def __post_init__(self) -> None:
        q = np.asarray(self.entries, dtype=np.float64)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError("QUBO matrix must be square")
        if q.shape[0] < 1:
            raise ValueError("QUBO matrix must be at least 1x1")
        if not np.all(np.isfinite(q)):
            raise ValueError("QUBO matrix entries must be finite")
        if np.any(np.tril(q, -1) != 0.0):
            raise ValueError("lower triangle must be identically zero")
        object.__setattr__(self, "entries", q)
        self.entries.setflags(write=False)

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class QuboProblem:
    """QuboMatrix plus objective scale, penalty scale, and target cardinality."""

    q: QuboMatrix
    alpha: float = 1000.0
    lam: float = 10.0
    k: int = 1

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if not 1 <= self.k <= self.q.size:
            raise ValueError(f"k must lie in [1, {self.q.size}]")

    @property
    def size(self) -> int:
        return self.q.size


def build_q(dataset: Dataset, metric: MetricKind) -> QuboMatrix:
    """Q_ii = -distance(column i, target); Q_ij (i<j) = distance(column i, column j)."""
    m = dataset.n_features
    q = np.zeros((m, m), dtype=np.float64)
    y = dataset.target
    for i in range(m):
        xi = dataset.features[:, i]
        try:
            q[i, i] = -distance(metric, xi, y)
        except ValueError as exc:
            raise ValueError(f"metric failed for column {i} vs target: {exc}") from exc
        for j in range(i + 1, m):
            try:
                q[i, j] = distance(metric, xi, dataset.features[:, j])
            except ValueError as exc:
                raise ValueError(
                    f"metric failed for column pair ({i}, {j}): {exc}"
                ) from exc
    return QuboMatrix(q)


def _mask_array(q: QuboMatrix, omega: FeatureMask) -> NDArray[np.float64]:
    if len(omega) != q.size:
        raise ValueError(f"mask length {len(omega)} does not match M={q.size}")
    return np.asarray(omega.bits, dtype=np.float64)


def raw_objective(q: QuboMatrix, omega: FeatureMask, alpha: float) -> float:
    """alpha * sum_{i<=j} w_i Q_ij w_j for the binary vector w."""
    w = _mask_array(q, omega)
    return float(alpha * (w @ q.entries @ w))


def energy(problem: QuboProblem, omega: FeatureMask) -> float:
    """Scaled objective plus the soft cardinality penalty lambda*(sum w - k)^2."""
    base = raw_objective(problem.q, omega, problem.alpha)
    return base + problem.lam * (omega.k - problem.k) ** 2


def expand_penalized(problem: QuboProblem) -> tuple[QuboMatrix, float]:
    """Fold the penalty into a single QUBO matrix for transport.

    Returns (Q', offset) with Q'_ii = alpha*Q_ii + lambda*(1 - 2k),
    Q'_ij = alpha*Q_ij + 2*lambda (i < j), offset = lambda*k^2, so that
    sum_{i<=j} w_i Q'_ij w_j = energy(problem, w) - offset for every mask w.
    """
    m = problem.size
    q = problem.alpha * problem.q.entries.copy()
    idx = np.arange(m)
    q[idx, idx] += problem.lam * (1.0 - 2.0 * problem.k)
    upper = np.triu_indices(m, 1)
    q[upper] += 2.0 * problem.lam
    return QuboMatrix(q), float(problem.lam * problem.k**2)
