"""Ranking validity, classification sweeps and nonparametric tests.

Scores are "higher is more"; positives are the breakthrough (nobel) papers.
Top-k sets break score ties by ascending position in the input, so every
routine here is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Callable, Optional, Sequence, Union

import numba
import numpy as np
from scipy.stats import rankdata

EXACT_MWU_MAX_N = 12


@dataclass
class RankedSample:
    scores: Sequence[float]
    is_positive: Sequence[bool]

    def __post_init__(self):
        if len(self.scores) != len(self.is_positive):
            raise ValueError("scores and is_positive differ in length")
        if len(self.scores) == 0:
            raise ValueError("empty sample")

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        pos = np.asarray(self.is_positive, dtype=bool)
        if not pos.any():
            raise ValueError("sample has no positives")
        return np.asarray(self.scores, dtype=np.float64), pos


@dataclass
class TestResult:
    statistic: float
    p_value: float
    method: str  # "exact" or "normal_approx"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class BootstrapCI:
    point: float
    lo: float
    hi: float
    level: float = 0.95
    replicates: int = 1000
    n: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _topk_order(scores: np.ndarray) -> np.ndarray:
    # descending score, then ascending index
    return np.lexsort((np.arange(len(scores)), -scores))


def average_ranking(s: RankedSample) -> float:
    """Mean rank of the positives divided by N (ties share their mid-rank)."""
    scores, pos = s.arrays()
    ranks = rankdata(-scores, method="average")
    return float(ranks[pos].mean() / len(scores))


def identification_proportion(s: RankedSample) -> tuple[list[float], float]:
    """Share of positives inside the top ``ceil(f% * N)`` papers, f = 1..100."""
    scores, pos = s.arrays()
    n = len(scores)
    hits = np.cumsum(pos[_topk_order(scores)])
    total = int(pos.sum())
    curve = []
    for f in range(1, 101):
        top = -(-f * n // 100)
        curve.append(int(hits[top - 1]) / total)
    return curve, sum(curve) / 100


def classification_curve(s: RankedSample) -> tuple[float, float, float]:
    """Average precision, recall and F1 of "top-k are positive", k = 1..N.

    k = 0 is skipped because precision is undefined there.
    """
    scores, pos = s.arrays()
    n = len(scores)
    tp = np.cumsum(pos[_topk_order(scores)]).astype(np.float64)
    k = np.arange(1, n + 1, dtype=np.float64)
    precision = tp / k
    recall = tp / pos.sum()
    denom = precision + recall
    with np.errstate(invalid="ignore", divide="ignore"):
        f1 = np.where(denom > 0, 2 * precision * recall / denom, 0.0)
    return float(precision.mean()), float(recall.mean()), float(f1.mean())


def _u_statistic(a: np.ndarray, b: np.ndarray) -> float:
    ranks = rankdata(np.concatenate([a, b]), method="average")
    n1 = len(a)
    return float(ranks[:n1].sum() - n1 * (n1 + 1) / 2)


def _exact_u_distribution(n1: int, n2: int) -> np.ndarray:
    """Counts of each U value over all C(n1+n2, n1) rank assignments (no ties)."""
    n = n1 + n2
    counts = np.zeros(n1 * n2 + 1, dtype=np.int64)
    base = n1 * (n1 + 1) // 2
    for combo in combinations(range(1, n + 1), n1):
        counts[sum(combo) - base] += 1
    return counts


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """Two-sided Mann-Whitney U test; the statistic is U for ``a``.

    Exact enumeration for small tie-free samples, otherwise the normal
    approximation with tie-corrected variance and continuity correction.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("both samples must be non-empty")
    n1, n2 = len(a), len(b)
    n = n1 + n2
    u = _u_statistic(a, b)
    pooled = np.concatenate([a, b])
    _, tie_counts = np.unique(pooled, return_counts=True)
    has_ties = bool((tie_counts > 1).any())

    if n <= EXACT_MWU_MAX_N and not has_ties:
        dist = _exact_u_distribution(n1, n2)
        total = dist.sum()
        ui = int(round(u))
        lower = dist[:ui + 1].sum() / total
        upper = dist[ui:].sum() / total
        p = min(1.0, 2 * min(lower, upper))
        return TestResult(u, float(p), "exact")

    mu = n1 * n2 / 2
    tie_term = float((tie_counts.astype(np.float64) ** 3 - tie_counts).sum())
    var = n1 * n2 / 12 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0:
        return TestResult(u, 1.0, "normal_approx")
    z = (abs(u - mu) - 0.5) / math.sqrt(var)
    if z <= 0:
        return TestResult(u, 1.0, "normal_approx")
    p = math.erfc(z / math.sqrt(2))
    return TestResult(u, min(1.0, max(0.0, p)), "normal_approx")


def kendall_tau(x: Sequence[float], y: Sequence[float]) -> float:
    """Tie-corrected Kendall tau-b."""
    if len(x) != len(y):
        raise ValueError("x and y differ in length")
    if len(x) < 2:
        raise ValueError("need at least two observations")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(x)
    order = np.lexsort((y, x))
    xs, ys = x[order], y[order]
    n0 = n * (n - 1) // 2
    n1 = _tied_pairs(xs)
    n3 = _tied_pairs_joint(xs, ys)
    swaps = _count_inversions(ys.copy())
    n2 = _tied_pairs(np.sort(y))
    if n0 == n1 or n0 == n2:
        raise ValueError("tau-b undefined: a variable is constant")
    # concordant - discordant, kept in integers so the result is exactly rounded
    s = n0 - n1 - n2 + n3 - 2 * swaps
    return s / math.sqrt((n0 - n1) * (n0 - n2))


def _tied_pairs(sorted_vals: np.ndarray) -> int:
    _, counts = np.unique(sorted_vals, return_counts=True)
    return int((counts * (counts - 1) // 2).sum())


def _tied_pairs_joint(xs: np.ndarray, ys: np.ndarray) -> int:
    if len(xs) < 2:
        return 0
    change = np.flatnonzero((xs[1:] != xs[:-1]) | (ys[1:] != ys[:-1])) + 1
    counts = np.diff(np.concatenate([[0], change, [len(xs)]]))
    return int((counts * (counts - 1) // 2).sum())


@numba.njit(cache=True)
def _count_inversions(a):
    """Number of pairs i < j with a[i] > a[j] (bottom-up merge sort)."""
    n = a.shape[0]
    buf = np.empty_like(a)
    inv = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if a[j] < a[i]:
                    buf[k] = a[j]
                    inv += mid - i
                    j += 1
                else:
                    buf[k] = a[i]
                    i += 1
                k += 1
            while i < mid:
                buf[k] = a[i]
                i += 1
                k += 1
            while j < hi:
                buf[k] = a[j]
                j += 1
                k += 1
        a, buf = buf, a
        width *= 2
    return inv


def bootstrap_ci(values: Sequence[float], replicates: int = 1000, level: float = 0.95,
                 seed: int = 0, chunk: int = 200) -> BootstrapCI:
    """Percentile bootstrap interval for the mean (PCG64 seeded by ``seed``)."""
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    vals = np.asarray(values, dtype=np.float64)
    n = len(vals)
    if n == 0:
        raise ValueError("values must be non-empty")
    point = float(vals.mean())
    if np.all(vals == vals[0]):
        return BootstrapCI(point, point, point, level, replicates, n)
    rng = np.random.default_rng(seed)
    means = np.empty(replicates)
    for start in range(0, replicates, chunk):
        stop = min(replicates, start + chunk)
        idx = rng.integers(0, n, size=(stop - start, n))
        means[start:stop] = vals[idx].mean(axis=1)
    alpha = 1 - level
    lo, hi = np.quantile(means, [alpha / 2, 1 - alpha / 2])
    # percentile intervals can miss a skewed point estimate; keep lo <= point <= hi
    return BootstrapCI(point, float(min(lo, point)), float(max(hi, point)),
                       level, replicates, n)


KeySelector = Union[str, Callable[[object], Optional[float]]]


def _selector(key: KeySelector) -> Callable[[object], Optional[float]]:
    if callable(key):
        return key
    return lambda row: getattr(row, key)


def group_split(rows: Sequence, key: KeySelector, quantile: float = 0.5
                ) -> tuple[list, list, int]:
    """Split rows at the ``quantile`` of ``key`` (linear interpolation).

    Returns ``(high, low, n_undefined)``: high holds rows strictly above the
    threshold, low the rest; rows with an undefined key are left out.
    """
    if not 0 < quantile < 1:
        raise ValueError("quantile must lie in (0, 1)")
    get = _selector(key)
    keyed = [(row, get(row)) for row in rows]
    defined = [(row, v) for row, v in keyed if v is not None]
    if len(defined) < 2:
        raise ValueError("need at least two rows with a defined key")
    threshold = float(np.quantile([v for _, v in defined], quantile))
    high = [row for row, v in defined if v > threshold]
    low = [row for row, v in defined if v <= threshold]
    return high, low, len(keyed) - len(defined)


def team_size_buckets(max_bucket: int = 10) -> list[str]:
    return [str(i) for i in range(1, max_bucket)] + [f"{max_bucket}+"]


def team_size_profile(rows: Sequence, key: KeySelector, max_bucket: int = 10,
                      replicates: int = 1000, level: float = 0.95, seed: int = 0
                      ) -> dict[str, Optional[BootstrapCI]]:
    """Mean of ``key`` per team-size bucket with a bootstrap interval.

    Buckets are 1 .. max_bucket-1 and a ``max_bucket+`` catch-all; bucket
    ``i`` uses seed ``seed + i`` so buckets are independent of each other.
    Empty buckets map to ``None``.
    """
    get = _selector(key)
    labels = team_size_buckets(max_bucket)
    values: dict[str, list[float]] = {lab: [] for lab in labels}
    for row in rows:
        ts = row.team_size
        v = get(row)
        if ts is None or v is None:
            continue
        values[labels[min(ts, max_bucket) - 1]].append(v)
    out: dict[str, Optional[BootstrapCI]] = {}
    for i, lab in enumerate(labels):
        vals = values[lab]
        out[lab] = bootstrap_ci(vals, replicates, level, seed + i) if vals else None
    return out


def bucket_counts(rows: Sequence, max_bucket: int = 10) -> dict[str, int]:
    labels = team_size_buckets(max_bucket)
    counts = dict.fromkeys(labels, 0)
    for row in rows:
        if row.team_size is not None:
            counts[labels[min(row.team_size, max_bucket) - 1]] += 1
    return counts
