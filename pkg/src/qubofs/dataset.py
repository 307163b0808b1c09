"""Dataset construction: synthetic generation, CSV loading, encoding, splitting."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray


class DataLoadError(ValueError):
    """Raised when a data file cannot be turned into a Dataset."""


# Canonical imports-85 column names; the last one is the regression target.
AUTO_COLUMN_NAMES = (
    "symboling", "normalized-losses", "make", "fuel-type", "aspiration",
    "num-of-doors", "body-style", "drive-wheels", "engine-location",
    "wheel-base", "length", "width", "height", "curb-weight", "engine-type",
    "num-of-cylinders", "engine-size", "fuel-system", "bore", "stroke",
    "compression-ratio", "horsepower", "peak-rpm", "city-mpg", "highway-mpg",
    "price",
)
AUTO_FIELD_COUNT = len(AUTO_COLUMN_NAMES)

MISSING_POLICY_IMPUTE = "drop_row_if_target_missing_impute_rest"
MISSING_POLICY_DROP_ANY = "drop_any_missing"


@dataclass(frozen=True)
class FeatureMask:
    """Binary column-selection vector; bit i keeps feature i."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("mask bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @property
    def k(self) -> int:
        return sum(self.bits)

    @classmethod
    def from_indices(cls, length: int, indices) -> "FeatureMask":
        idx = set(int(i) for i in indices)
        if any(i < 0 or i >= length for i in idx):
            raise ValueError("mask index out of range")
        return cls(tuple(1 if i in idx else 0 for i in range(length)))

    def indices(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b)

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus target vector, with per-column bookkeeping."""

    features: NDArray[np.float64]
    target: NDArray[np.float64]
    feature_names: tuple[str, ...]
    column_kinds: tuple[str, ...]
    target_name: str = "y"

    def __post_init__(self) -> None:
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.target, dtype=np.float64)
        if X.ndim != 2 or y.ndim != 1:
            raise ValueError("features must be 2-D and target 1-D")
        if X.shape[0] != y.shape[0]:
            raise ValueError("features row count must equal target length")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError("dataset needs at least one row and one column")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise ValueError("dataset contains non-finite values")
        names = tuple(self.feature_names)
        kinds = tuple(self.column_kinds)
        if len(names) != X.shape[1]:
            raise ValueError("feature_names length must equal column count")
        if len(set(names)) != len(names):
            raise ValueError("feature_names must be unique")
        if len(kinds) != X.shape[1]:
            raise ValueError("column_kinds length must equal column count")
        if any(k not in ("numeric", "ordinal-encoded") for k in kinds):
            raise ValueError("column_kinds entries must be numeric or ordinal-encoded")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "target", y)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "column_kinds", kinds)
        self.features.setflags(write=False)
        self.target.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class SplitPlan:
    """Repeated random train/test partition recipe."""

    train_fraction: float = 0.7
    n_repeats: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.n_repeats < 1:
            raise ValueError("n_repeats must be positive")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


def generate_friedman1(
    n_samples: int,
    n_features: int = 50,
    noise_sigma: float = 1.0,
    seed: int = 0,
) -> Dataset:
    """Synthetic regression benchmark; only the first five features carry signal.

    y = 10*sin(pi*x1*x2) + 20*(x3 - 0.5)^2 + 10*x4 + 5*x5 + Normal(0, noise_sigma^2),
    every feature i.i.d. uniform on [0, 1].
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    if n_features < 5:
        raise ValueError("n_features must be at least 5 (signal carriers)")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n_samples, n_features))
    y = (
        10.0 * np.sin(np.pi * X[:, 0] * X[:, 1])
        + 20.0 * (X[:, 2] - 0.5) ** 2
        + 10.0 * X[:, 3]
        + 5.0 * X[:, 4]
    )
    if noise_sigma > 0:
        y = y + rng.normal(0.0, noise_sigma, n_samples)
    names = tuple(f"x{i + 1}" for i in range(n_features))
    return Dataset(X, y, names, ("numeric",) * n_features)


def ordinal_encode(values) -> NDArray[np.float64]:
    """Map category labels to 0, 1, 2, ... in order of first appearance."""
    labels = list(values)
    if not labels:
        raise ValueError("ordinal_encode needs a non-empty vector")
    codes: dict[object, int] = {}
    out = np.empty(len(labels), dtype=np.float64)
    for i, lab in enumerate(labels):
        if lab not in codes:
            codes[lab] = len(codes)
        out[i] = codes[lab]
    return out


def _read_auto_rows(path: str) -> list[list[str]]:
    try:
        with open(path, "r", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataLoadError(f"cannot read {path}: {exc}") from exc
    lines = text.split("\n")
    # tolerate CRLF and drop blank trailing lines only
    lines = [ln.rstrip("\r") for ln in lines]
    while lines and lines[-1] == "":
        lines.pop()
    rows = []
    for lineno, line in enumerate(lines, start=1):
        fields = line.split(",")
        if len(fields) != AUTO_FIELD_COUNT:
            raise DataLoadError(
                f"row {lineno}: expected {AUTO_FIELD_COUNT} fields, got {len(fields)}"
            )
        rows.append([f.strip() for f in fields])
    if not rows:
        raise DataLoadError(f"{path} holds no data rows")
    return rows


def _parses_as_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def load_auto_csv(path: str, missing_policy: str = MISSING_POLICY_IMPUTE) -> Dataset:
    """Load the UCI imports-85 file: 26 comma-separated fields, no header,
    '?' marks a missing value, the final field (price) is the target.

    Rows with a missing price are always dropped. Remaining gaps follow
    missing_policy: the default imputes numeric columns with the column median
    and keeps '?' as a category of its own in nominal columns;
    "drop_any_missing" discards every row containing any '?'.
    """
    if missing_policy not in (MISSING_POLICY_IMPUTE, MISSING_POLICY_DROP_ANY):
        raise ValueError(f"unknown missing policy: {missing_policy!r}")
    rows = _read_auto_rows(path)

    target_col = AUTO_FIELD_COUNT - 1
    kept = [r for r in rows if r[target_col] != "?"]
    if missing_policy == MISSING_POLICY_DROP_ANY:
        kept = [r for r in kept if all(f != "?" for f in r)]
    if not kept:
        raise DataLoadError(f"{path}: no rows survive the missing-value policy")

    for lineno, row in enumerate(rows, start=1):
        if row[target_col] != "?" and not _parses_as_float(row[target_col]):
            raise DataLoadError(
                f"row {lineno}, column {AUTO_FIELD_COUNT} (price): "
                f"not numeric: {row[target_col]!r}"
            )

    n = len(kept)
    m = AUTO_FIELD_COUNT - 1
    X = np.empty((n, m), dtype=np.float64)
    kinds: list[str] = []
    for j in range(m):
        col = [r[j] for r in kept]
        present = [f for f in col if f != "?"]
        numeric = bool(present) and all(_parses_as_float(f) for f in present)
        if numeric:
            vals = np.array([float(f) if f != "?" else np.nan for f in col])
            gaps = np.isnan(vals)
            if gaps.any():
                if gaps.all():
                    raise DataLoadError(
                        f"column {j + 1} ({AUTO_COLUMN_NAMES[j]}): entirely missing"
                    )
                vals[gaps] = np.median(vals[~gaps])
            X[:, j] = vals
            kinds.append("numeric")
        else:
            X[:, j] = ordinal_encode(col)
            kinds.append("ordinal-encoded")
    y = np.array([float(r[target_col]) for r in kept])
    return Dataset(X, y, AUTO_COLUMN_NAMES[:m], tuple(kinds), target_name="price")


def split(dataset: Dataset, plan: SplitPlan) -> list[tuple[Dataset, Dataset]]:
    """Repeated random partitions: a fresh permutation per repeat, first
    floor(train_fraction * N) rows to train, the rest to test."""
    n = dataset.n_rows
    n_train = int(np.floor(plan.train_fraction * n))
    if n_train < 1 or n - n_train < 1:
        raise ValueError(
            f"cannot split {n} rows at train_fraction={plan.train_fraction}"
        )
    pairs = []
    for rep in range(plan.n_repeats):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=plan.seed, spawn_key=(rep,))
        )
        perm = rng.permutation(n)
        tr, te = perm[:n_train], perm[n_train:]
        pairs.append((_take_rows(dataset, tr), _take_rows(dataset, te)))
    return pairs


def _take_rows(dataset: Dataset, idx: NDArray[np.integer]) -> Dataset:
    return Dataset(
        dataset.features[idx],
        dataset.target[idx],
        dataset.feature_names,
        dataset.column_kinds,
        target_name=dataset.target_name,
    )


def filter_columns(dataset: Dataset, mask: FeatureMask) -> Dataset:
    """Keep exactly the columns whose mask bit is 1, preserving order."""
    if len(mask) != dataset.n_features:
        raise ValueError(
            f"mask length {len(mask)} does not match {dataset.n_features} features"
        )
    if mask.k < 1:
        raise ValueError("all-zero mask leaves no features to train on")
    idx = list(mask.indices())
    return Dataset(
        dataset.features[:, idx],
        dataset.target,
        tuple(dataset.feature_names[i] for i in idx),
        tuple(dataset.column_kinds[i] for i in idx),
        target_name=dataset.target_name,
    )
