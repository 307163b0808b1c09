"""Downstream regressors used to score feature subsets.

Two model families: multiple linear regression solved by normal equations,
and gradient-boosted regression trees built from scratch with squared-error
stagewise fitting. Both fits are deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

RIDGE_FACTOR = 1e-8
COND_LIMIT = 1e12


@dataclass(frozen=True)
class LinearModel:
    """Least-squares weights and intercept."""

    weights: np.ndarray
    intercept: float


@dataclass(frozen=True)
class GbrParams:
    n_trees: int = 100
    max_depth: int = 3
    learning_rate: float = 0.1
    min_samples_leaf: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1 or self.max_depth < 1 or self.min_samples_leaf < 1:
            raise ValueError("n_trees, max_depth, min_samples_leaf must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


@dataclass
class _Tree:
    """Flat array-of-nodes regression tree; children -1 marks a leaf."""

    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)
    gain: list[float] = field(default_factory=list)

    def add_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        self.gain.append(0.0)
        return len(self.value) - 1

    def apply(self, x: np.ndarray) -> np.ndarray:
        out = np.empty(x.shape[0])
        stack = [(0, np.arange(x.shape[0]))]
        while stack:
            node, rows = stack.pop()
            if rows.size == 0:
                continue
            if self.left[node] < 0:
                out[rows] = self.value[node]
                continue
            go_left = x[rows, self.feature[node]] <= self.threshold[node]
            stack.append((self.left[node], rows[go_left]))
            stack.append((self.right[node], rows[~go_left]))
        return out


@dataclass(frozen=True)
class GbrModel:
    """Boosted ensemble: prediction = base + learning_rate * sum of trees."""

    base_prediction: float
    trees: tuple[_Tree, ...]
    learning_rate: float
    n_features: int
    train_prediction: np.ndarray


def _check_xy(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ValueError("expected X as n x k matrix and y as length-n vector")
    if x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError("need at least one row and one column")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("non-finite training values")
    return x, y


def fit_linear(x: np.ndarray, y: np.ndarray) -> LinearModel:
    """Least squares via normal equations, ridge-stabilized when ill-posed."""
    x, y = _check_xy(x, y)
    a = np.column_stack([x, np.ones(x.shape[0])])
    gram = a.T @ a
    rhs = a.T @ y
    if np.linalg.cond(gram) > COND_LIMIT:
        gram = gram + RIDGE_FACTOR * np.mean(np.diag(gram)) * np.eye(gram.shape[0])
    coef = np.linalg.solve(gram, rhs)
    return LinearModel(weights=coef[:-1].copy(), intercept=float(coef[-1]))


def predict_linear(model: LinearModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.weights.shape[0]:
        raise ValueError(
            f"expected {model.weights.shape[0]} columns, got "
            f"{x.shape[1] if x.ndim == 2 else 'non-matrix input'}"
        )
    return x @ model.weights + model.intercept


def _best_split(x: np.ndarray, residual: np.ndarray, rows: np.ndarray,
                min_leaf: int) -> tuple[int, float, float] | None:
    """Exhaustive scan over feature/midpoint candidates.

    Returns (feature, threshold, sse_reduction) or None when no admissible
    split exists. Ties resolve to the lower feature index, then the lower
    threshold, by scan order with strict improvement.
    """
    r = residual[rows]
    n = rows.size
    total = r.sum()
    parent_sse = float(r @ r - total * total / n)
    best: tuple[int, float, float] | None = None
    for j in range(x.shape[1]):
        col = x[rows, j]
        order = np.argsort(col, kind="stable")
        cs, rs = col[order], r[order]
        # candidate cut after position i requires a value change there
        cum = np.cumsum(rs)
        cumsq = np.cumsum(rs * rs)
        sizes = np.arange(1, n)
        boundary = cs[:-1] < cs[1:]
        boundary &= (sizes >= min_leaf) & (n - sizes >= min_leaf)
        if not boundary.any():
            continue
        idx = np.flatnonzero(boundary)
        left_sse = cumsq[idx] - cum[idx] ** 2 / sizes[idx]
        right_n = n - sizes[idx]
        right_sum = total - cum[idx]
        right_sse = (cumsq[-1] - cumsq[idx]) - right_sum**2 / right_n
        gains = parent_sse - (left_sse + right_sse)
        pick = int(np.argmax(gains))
        gain = float(gains[pick])
        if gain <= 0.0:
            continue
        if best is None or gain > best[2]:
            cut = idx[pick]
            best = (j, float((cs[cut] + cs[cut + 1]) / 2.0), gain)
    return best


def _grow_tree(x: np.ndarray, residual: np.ndarray,
               params: GbrParams) -> _Tree:
    tree = _Tree()
    root = tree.add_node()
    stack = [(root, np.arange(x.shape[0]), 0)]
    while stack:
        node, rows, depth = stack.pop()
        tree.value[node] = float(residual[rows].mean())
        if depth >= params.max_depth or rows.size < 2 * params.min_samples_leaf:
            continue
        split = _best_split(x, residual, rows, params.min_samples_leaf)
        if split is None:
            continue
        j, threshold, gain = split
        tree.feature[node] = j
        tree.threshold[node] = threshold
        tree.gain[node] = gain
        go_left = x[rows, j] <= threshold
        tree.left[node] = tree.add_node()
        tree.right[node] = tree.add_node()
        stack.append((tree.left[node], rows[go_left], depth + 1))
        stack.append((tree.right[node], rows[~go_left], depth + 1))
    return tree


def fit_gbr(x: np.ndarray, y: np.ndarray, params: GbrParams | None = None) -> GbrModel:
    """Stagewise squared-error boosting; each tree fits current residuals."""
    if params is None:
        params = GbrParams()
    x, y = _check_xy(x, y)
    if x.shape[0] < 2 * params.min_samples_leaf:
        raise ValueError(
            f"need at least {2 * params.min_samples_leaf} rows, got {x.shape[0]}"
        )
    base = float(y.mean())
    prediction = np.full(y.shape[0], base)
    trees = []
    for _ in range(params.n_trees):
        tree = _grow_tree(x, y - prediction, params)
        prediction = prediction + params.learning_rate * tree.apply(x)
        trees.append(tree)
    return GbrModel(
        base_prediction=base,
        trees=tuple(trees),
        learning_rate=params.learning_rate,
        n_features=x.shape[1],
        train_prediction=prediction,
    )


def predict_gbr(model: GbrModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise ValueError(
            f"expected {model.n_features} columns, got "
            f"{x.shape[1] if x.ndim == 2 else 'non-matrix input'}"
        )
    out = np.full(x.shape[0], model.base_prediction)
    for tree in model.trees:
        out += model.learning_rate * tree.apply(x)
    return out


def mae(y_pred: np.ndarray, y_true: np.ndarray) -> float:
    y_pred = np.asarray(y_pred, dtype=np.float64)
    y_true = np.asarray(y_true, dtype=np.float64)
    if y_pred.shape != y_true.shape or y_pred.ndim != 1 or y_pred.size < 1:
        raise ValueError("predictions and targets must be equal-length vectors")
    return float(np.abs(y_pred - y_true).mean())


def importance(model: LinearModel | GbrModel,
               feature_scales: np.ndarray | None = None) -> np.ndarray:
    """Per-feature relevance scores, normalized to sum to one when nonzero.

    Linear models score |weight| times the feature scale (training-column
    standard deviation); boosted models accumulate the squared-error
    reduction of every split on each feature.
    """
    if isinstance(model, LinearModel):
        if feature_scales is None:
            raise ValueError("linear importance needs feature scales")
        scales = np.asarray(feature_scales, dtype=np.float64)
        if scales.shape != model.weights.shape:
            raise ValueError("feature_scales length must match weights")
        raw = np.abs(model.weights) * scales
    else:
        raw = np.zeros(model.n_features)
        for tree in model.trees:
            for node, j in enumerate(tree.feature):
                if j >= 0:
                    raw[j] += tree.gain[node]
    total = raw.sum()
    return raw / total if total > 0 else raw
