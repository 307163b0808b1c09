"""Dependence measures for relevancy/redundancy scoring: Pearson correlation,
k-NN mutual information, MIC, and GMIC.

The grid-based coefficients follow the usual approximation scheme: one axis is
equipartitioned, the other is optimized by dynamic programming over clump
boundaries, and every admissible grid shape (i, j >= 2, i*j <= floor(N^0.6))
contributes one normalized entry.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from numba import njit
from numpy.typing import NDArray
from scipy.spatial import cKDTree
from scipy.special import digamma

PCC = "pcc"
MI = "mi"
MIC = "mic"
GMIC = "gmic"
METRIC_VARIANTS = (PCC, MI, MIC, GMIC)

CLUMP_FACTOR = 15
_TIE_JITTER_SCALE = 1e-10
_GMIC_FLOOR = 1e-12


@dataclass(frozen=True)
class MetricKind:
    """Metric selector plus the knobs each variant reads."""

    variant: str = PCC
    k_neighbors: int = 3
    p: float = -1.0
    grid_exponent: float = 0.6

    def __post_init__(self) -> None:
        if self.variant not in METRIC_VARIANTS:
            raise ValueError(f"unknown metric variant: {self.variant!r}")
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be at least 1")
        if not np.isfinite(self.p):
            raise ValueError("p must be finite")
        if not 0.0 < self.grid_exponent < 1.0:
            raise ValueError("grid_exponent must lie in (0, 1)")


@dataclass(frozen=True)
class CharacteristicMatrix:
    """Normalized maximal grid-MI values keyed by grid shape (i, j)."""

    entries: dict[tuple[int, int], float]
    sample_count: int

    def __post_init__(self) -> None:
        for (i, j), v in self.entries.items():
            if i < 2 or j < 2:
                raise ValueError("grid shape axes must both be >= 2")
            if not -1e-9 <= v <= 1.0 + 1e-9:
                raise ValueError(f"entry for shape ({i},{j}) outside [0,1]: {v}")


def _as_vector(x, name: str) -> NDArray[np.float64]:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector")
    return v


def _check_pair(x, y) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    vx, vy = _as_vector(x, "x"), _as_vector(y, "y")
    if vx.shape[0] != vy.shape[0]:
        raise ValueError(f"length mismatch: {vx.shape[0]} vs {vy.shape[0]}")
    return vx, vy


def pcc(x, y) -> float:
    """Sample Pearson correlation; 0.0 when either vector has no variance."""
    vx, vy = _check_pair(x, y)
    if vx.shape[0] < 2:
        raise ValueError("pcc needs at least 2 samples")
    dx = vx - vx.mean()
    dy = vy - vy.mean()
    sx = float(np.sqrt(dx @ dx))
    sy = float(np.sqrt(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        return 0.0
    r = float((dx @ dy) / (sx * sy))
    return max(-1.0, min(1.0, r))


def _tie_jitter(v: NDArray[np.float64]) -> NDArray[np.float64]:
    """Deterministic symmetric jitter; applied only when duplicates exist.

    The RNG seed is a content hash so the same column always receives the
    same perturbation no matter which argument slot it occupies.
    """
    if np.unique(v).size == v.size:
        return v
    digest = hashlib.blake2b(v.tobytes(), digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    spread = float(v.max() - v.min())
    if spread == 0.0:
        spread = 1.0
    return v + (rng.random(v.size) - 0.5) * _TIE_JITTER_SCALE * spread


def mi_knn(x, y, k_neighbors: int = 3) -> float:
    """Kraskov-style k-NN mutual information estimate in nats.

    Max-norm joint neighborhoods; marginal counts taken strictly inside the
    k-th neighbor distance. May come out slightly negative; callers needing a
    nonnegative relevancy clamp at zero.
    """
    vx, vy = _check_pair(x, y)
    n = vx.shape[0]
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be at least 1")
    if n <= k_neighbors:
        raise ValueError(f"need more than k_neighbors={k_neighbors} samples, got {n}")
    vx = _tie_jitter(vx)
    vy = _tie_jitter(vy)
    pts = np.column_stack((vx, vy))
    tree = cKDTree(pts)
    dist, _ = tree.query(pts, k=k_neighbors + 1, p=np.inf)
    eps = dist[:, k_neighbors]
    n_x = _strict_interval_counts(vx, eps)
    n_y = _strict_interval_counts(vy, eps)
    return float(
        digamma(k_neighbors)
        + digamma(n)
        - np.mean(digamma(n_x + 1) + digamma(n_y + 1))
    )


def _strict_interval_counts(v: NDArray[np.float64], eps: NDArray[np.float64]):
    """Per point, how many other points sit strictly within eps on this axis."""
    order = np.sort(v)
    n = order.shape[0]
    hi = np.searchsorted(order, v + eps, side="left")
    lo = np.searchsorted(order, v - eps, side="right")
    # v +/- eps rounds, which can land a boundary point on the wrong side of
    # the strict test; nudge both indices until order[j] - v < eps holds
    # exactly below hi and v - order[j] < eps holds exactly from lo upward
    while True:
        grow = (hi < n) & (order[np.minimum(hi, n - 1)] - v < eps)
        if not grow.any():
            break
        hi[grow] += 1
    while True:
        shrink = (hi > 0) & (order[hi - 1] - v >= eps)
        if not shrink.any():
            break
        hi[shrink] -= 1
    while True:
        grow = (lo > 0) & (v - order[np.maximum(lo - 1, 0)] < eps)
        if not grow.any():
            break
        lo[grow] -= 1
    while True:
        shrink = (lo < n) & (v - order[np.minimum(lo, n - 1)] >= eps)
        if not shrink.any():
            break
        lo[shrink] += 1
    return hi - lo - 1


# ---------------------------------------------------------------------------
# Grid coefficients (MIC / GMIC)
# ---------------------------------------------------------------------------

def _equipartition(v: NDArray[np.float64], n_bins: int) -> NDArray[np.int64]:
    """Assign points to n_bins rows of near-equal occupancy along v.

    Equal values always share a row, so heavy ties can realize fewer rows.
    """
    n = v.shape[0]
    order = np.argsort(v, kind="stable")
    sv = v[order]
    assign = np.empty(n, dtype=np.int64)
    i = 0
    row = 0
    row_start = 0
    target = n / n_bins
    while i < n:
        j = i + 1
        while j < n and sv[j] == sv[i]:
            j += 1
        run = j - i
        filled = i - row_start
        if filled > 0 and row < n_bins - 1:
            if abs(filled + run - target) >= abs(filled - target):
                row += 1
                row_start = i
                target = (n - i) / (n_bins - row)
        assign[order[i:j]] = row
        i = j
    return assign


def _clump_sizes(v_sorted_rows: NDArray[np.int64],
                 v_sorted: NDArray[np.float64]) -> NDArray[np.int64]:
    """Point counts of consecutive clumps along the optimized axis.

    Equal-value runs are atomic; a run spanning several rows forms its own
    clump, otherwise consecutive runs in the same row merge.
    """
    n = v_sorted.shape[0]
    unit_row = []
    unit_len = []
    i = 0
    fresh = -1
    while i < n:
        j = i + 1
        while j < n and v_sorted[j] == v_sorted[i]:
            j += 1
        rows = v_sorted_rows[i:j]
        if np.all(rows == rows[0]):
            unit_row.append(int(rows[0]))
        else:
            unit_row.append(fresh)
            fresh -= 1
        unit_len.append(j - i)
        i = j
    sizes = []
    cur = unit_len[0]
    for u in range(1, len(unit_row)):
        if unit_row[u] >= 0 and unit_row[u] == unit_row[u - 1]:
            cur += unit_len[u]
        else:
            sizes.append(cur)
            cur = unit_len[u]
    sizes.append(cur)
    return np.asarray(sizes, dtype=np.int64)


def _superclump_sizes(sizes: NDArray[np.int64], limit: int) -> NDArray[np.int64]:
    """Merge consecutive clumps down to at most `limit`, balancing occupancy."""
    if sizes.shape[0] <= limit:
        return sizes
    ids = np.repeat(np.arange(sizes.shape[0], dtype=np.float64), sizes)
    merged = _equipartition(ids, limit)
    boundaries = np.flatnonzero(np.diff(merged)) + 1
    return np.diff(np.concatenate(([0], boundaries, [ids.shape[0]]))).astype(np.int64)


@njit(cache=True)
def _optimize_axis(prefix_rows, prefix_total, n_rows, max_cols, hq_bits, n):
    """Best grid MI in bits for every column budget 2..max_cols.

    prefix_rows[t, r] counts points of row r within the first t clumps;
    the DP maximizes the additive per-column score sum_r c_r*log2(c_r/c_col)
    over consecutive clump partitions, which equals n*(I - H(rows))."""
    K = prefix_total.shape[0] - 1
    L = min(max_cols, K)
    # W[a, b]: score of a single column spanning clumps (a, b]
    W = np.full((K + 1, K + 1), -1e300)
    for a in range(K + 1):
        for b in range(a + 1, K + 1):
            tot = prefix_total[b] - prefix_total[a]
            s = 0.0
            for r in range(n_rows):
                c = prefix_rows[b, r] - prefix_rows[a, r]
                if c > 0:
                    s += c * np.log2(c / tot)
            W[a, b] = s
    best = np.full(K + 1, -1e300)
    for t in range(1, K + 1):
        best[t] = W[0, t]
    out = np.zeros(max_cols + 1)
    running = -1e300
    for l in range(2, max_cols + 1):
        if l <= K:
            nxt = np.full(K + 1, -1e300)
            for t in range(l, K + 1):
                m = -1e300
                for s in range(l - 1, t):
                    cand = best[s] + W[s, t]
                    if cand > m:
                        m = cand
                nxt[t] = m
            best = nxt
            if best[K] > running:
                running = best[K]
        out[l] = hq_bits + running / n
    return out


def _entropy_bits(assign: NDArray[np.int64]) -> float:
    counts = np.bincount(assign)
    counts = counts[counts > 0]
    p = counts / counts.sum()
    return float(-(p * np.log2(p)).sum())


def _axis_sweep(opt_axis: NDArray[np.float64], part_axis: NDArray[np.float64],
                n_part_bins: int, max_cols: int) -> NDArray[np.float64]:
    """Equipartition part_axis into n_part_bins, optimize opt_axis cuts;
    returns best MI in bits for each column budget up to max_cols."""
    n = opt_axis.shape[0]
    assign = _equipartition(part_axis, n_part_bins)
    hq = _entropy_bits(assign)
    order = np.argsort(opt_axis, kind="stable")
    rows_sorted = assign[order]
    v_sorted = opt_axis[order]
    sizes = _clump_sizes(rows_sorted, v_sorted)
    sizes = _superclump_sizes(sizes, CLUMP_FACTOR * max_cols)
    bounds = np.concatenate(([0], np.cumsum(sizes)))
    K = sizes.shape[0]
    n_rows = int(assign.max()) + 1
    prefix_rows = np.zeros((K + 1, n_rows), dtype=np.int64)
    for t in range(K):
        seg = rows_sorted[bounds[t]:bounds[t + 1]]
        prefix_rows[t + 1] = prefix_rows[t] + np.bincount(seg, minlength=n_rows)
    return _optimize_axis(
        prefix_rows, bounds.astype(np.int64), n_rows, max_cols, hq, n
    )


def characteristic_matrix(x, y, grid_exponent: float = 0.6) -> CharacteristicMatrix:
    """Normalized maximal grid-MI for every admissible shape (i, j):
    i, j >= 2 and i*j <= B(n) = floor(n^grid_exponent)."""
    vx, vy = _check_pair(x, y)
    n = vx.shape[0]
    if n < 4:
        raise ValueError("characteristic_matrix needs at least 4 samples")
    if not 0.0 < grid_exponent < 1.0:
        raise ValueError("grid_exponent must lie in (0, 1)")
    b = int(np.floor(n ** grid_exponent))
    raw: dict[tuple[int, int], float] = {}
    if b >= 4:
        # each shape is tried in both orientations; the better one wins
        for j in range(2, b // 2 + 1):
            max_i = b // j
            sweep = _axis_sweep(vx, vy, j, max_i)
            for i in range(2, max_i + 1):
                key = (i, j)
                raw[key] = max(raw.get(key, 0.0), sweep[i])
        for i in range(2, b // 2 + 1):
            max_j = b // i
            sweep = _axis_sweep(vy, vx, i, max_j)
            for j in range(2, max_j + 1):
                key = (i, j)
                raw[key] = max(raw.get(key, 0.0), sweep[j])
    entries = {
        (i, j): min(1.0, max(0.0, v / np.log2(min(i, j))))
        for (i, j), v in raw.items()
    }
    return CharacteristicMatrix(entries, n)


def mic(x, y, grid_exponent: float = 0.6) -> float:
    """Maximal information coefficient: largest characteristic-matrix entry."""
    cm = characteristic_matrix(x, y, grid_exponent)
    if not cm.entries:
        return 0.0
    return max(cm.entries.values())


def maximal_characteristic_matrix(cm: CharacteristicMatrix) -> CharacteristicMatrix:
    """Running maximum over grid-size products: entry (i, j) becomes the best
    value among all admissible shapes with product <= i*j."""
    shapes = sorted(cm.entries, key=lambda s: (s[0] * s[1], s))
    best = 0.0
    out: dict[tuple[int, int], float] = {}
    by_product: dict[int, list[tuple[int, int]]] = {}
    for s in shapes:
        by_product.setdefault(s[0] * s[1], []).append(s)
    for product in sorted(by_product):
        best = max(best, max(cm.entries[s] for s in by_product[product]))
        for s in by_product[product]:
            out[s] = best
    return CharacteristicMatrix(out, cm.sample_count)


def generalized_p_mean(values, p: float) -> float:
    """( mean(v^p) )^(1/p) with small values floored before negative powers."""
    if p == 0.0 or not np.isfinite(p):
        raise ValueError("p must be finite and nonzero")
    v = np.asarray(list(values), dtype=np.float64)
    if v.size == 0:
        return 0.0
    if p < 0:
        v = np.maximum(v, _GMIC_FLOOR)
    return float(np.mean(v ** p) ** (1.0 / p))


def gmic(x, y, p: float = -1.0, grid_exponent: float = 0.6) -> float:
    """Generalized mean information coefficient: p-mean of the maximal
    characteristic matrix over all admissible shapes (default p = -1)."""
    cm = maximal_characteristic_matrix(characteristic_matrix(x, y, grid_exponent))
    if not cm.entries:
        return 0.0
    return min(1.0, generalized_p_mean(cm.entries.values(), p))


def distance(metric: MetricKind, x, y) -> float:
    """Nonnegative dependence score used for both relevancy and redundancy."""
    if metric.variant == PCC:
        return abs(pcc(x, y))
    if metric.variant == MI:
        return max(0.0, mi_knn(x, y, metric.k_neighbors))
    if metric.variant == MIC:
        return mic(x, y, metric.grid_exponent)
    if metric.variant == GMIC:
        return gmic(x, y, metric.p, metric.grid_exponent)
    raise ValueError(f"unknown metric variant: {metric.variant!r}")
