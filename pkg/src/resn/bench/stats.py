"""Summary statistics and the two-sample Wilcoxon rank-sum test.

The rank-sum test runs exactly for small pooled samples (n + m <= 12) by
enumerating every assignment of pooled midranks to the first group, and falls
back to the tie- and continuity-corrected normal approximation otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb, sqrt

import numpy as np

from ..mrs import normal_cdf

EXACT_LIMIT = 12  # enumeration stays below C(12, 6) = 924 assignments


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    median: float
    max: float
    min: float
    sd: float


def summarize_values(values) -> SummaryStats:
    """Mean/median/max/min/sd with n-1 normalization; one value reports sd 0."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("cannot summarize an empty group")
    sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return SummaryStats(
        mean=float(np.mean(values)),
        median=float(np.median(values)),
        max=float(np.max(values)),
        min=float(np.min(values)),
        sd=sd,
    )


def _midranks_doubled(pooled: np.ndarray) -> np.ndarray:
    """Twice the fractional midranks, as exact integers."""
    order = np.argsort(pooled, kind="stable")
    doubled = np.empty(pooled.size, dtype=np.int64)
    i = 0
    while i < pooled.size:
        j = i
        while j + 1 < pooled.size and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        # ranks i+1 .. j+1 share the average; doubled it is (i + j + 2)
        doubled[order[i : j + 1]] = i + j + 2
        i = j + 1
    return doubled


def wilcoxon_rank_sum(a, b, method: str = "auto") -> float:
    """Two-sided rank-sum p-value for samples ``a`` and ``b``.

    ``method`` is ``"auto"`` (exact when n + m <= 12), ``"exact"``, or
    ``"approx"``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    if method not in ("auto", "exact", "approx"):
        raise ValueError(f"method must be 'auto', 'exact' or 'approx', got {method!r}")
    if method == "exact" or (method == "auto" and a.size + b.size <= EXACT_LIMIT):
        return _exact_p(a, b)
    return _approx_p(a, b)


def _exact_p(a: np.ndarray, b: np.ndarray) -> float:
    n, total = a.size, a.size + b.size
    doubled = _midranks_doubled(np.concatenate([a, b]))
    observed = int(doubled[:n].sum())
    # doubled rank total is N(N+1); the group mean is n(N+1), both exact ints
    mean_doubled = n * (total + 1)
    observed_dev = abs(observed - mean_doubled)
    hits = 0
    for picks in combinations(range(total), n):
        dev = abs(int(sum(doubled[i] for i in picks)) - mean_doubled)
        if dev >= observed_dev:
            hits += 1
    return hits / comb(total, n)


def _approx_p(a: np.ndarray, b: np.ndarray) -> float:
    n, m = a.size, b.size
    total = n + m
    doubled = _midranks_doubled(np.concatenate([a, b]))
    rank_sum = float(doubled[:n].sum()) / 2.0
    mean = n * (total + 1) / 2.0

    _, counts = np.unique(np.concatenate([a, b]), return_counts=True)
    tie_term = float(np.sum(counts.astype(float) ** 3 - counts))
    tie_factor = 1.0 - tie_term / (total**3 - total)
    variance = tie_factor * n * m * (total + 1) / 12.0
    if variance <= 0.0:
        return 1.0  # every pooled value identical
    z = max(abs(rank_sum - mean) - 0.5, 0.0) / sqrt(variance)
    return min(1.0, 2.0 * (1.0 - normal_cdf(z)))
