"""Partition-comparison metrics: Hungarian-matched accuracy, NMI, ARI.

All three are invariant under relabeling of either argument; they operate
on the contingency table of the two partitions.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import LabelVector


def _as_labels(v) -> np.ndarray:
    if isinstance(v, LabelVector):
        return v.labels
    return LabelVector(np.asarray(v)).labels


def contingency_table(pred, truth) -> np.ndarray:
    """K_pred x K_true count matrix; entries sum to n.

    Sparse ids are remapped to contiguous ranks here, so every metric is
    relabel-invariant and table size tracks the number of distinct ids.
    """
    p, t = _as_labels(pred), _as_labels(truth)
    if p.shape[0] != t.shape[0]:
        raise ValueError(f"label vectors differ in length: {p.shape[0]} vs {t.shape[0]}")
    _, p_ranks = np.unique(p, return_inverse=True)
    _, t_ranks = np.unique(t, return_inverse=True)
    table = np.zeros((int(p_ranks.max()) + 1, int(t_ranks.max()) + 1), dtype=np.int64)
    np.add.at(table, (p_ranks, t_ranks), 1)
    return table


def clustering_accuracy(pred, truth) -> float:
    """Best-case agreement fraction over one-to-one cluster<->class matchings.

    Solved as an optimal assignment on the negated contingency table,
    zero-padded to square so unmatched clusters contribute nothing.
    """
    table = contingency_table(pred, truth)
    n = int(table.sum())
    k = max(table.shape)
    padded = np.zeros((k, k), dtype=np.int64)
    padded[: table.shape[0], : table.shape[1]] = table
    rows, cols = linear_sum_assignment(-padded)
    return float(padded[rows, cols].sum()) / n


def _entropy(counts: np.ndarray, n: int) -> float:
    pk = counts[counts > 0] / n
    return float(-(pk * np.log(pk)).sum())


def nmi(pred, truth, average: str = "geometric") -> float:
    """Normalized mutual information in [0, 1].

    Normalizer is the geometric mean of the two label entropies by default;
    ``average="arithmetic"`` switches to (H1+H2)/2 for cross-checking against
    toolkits that use that convention.

    Degenerate conventions: 1.0 when the partitions are identical as
    partitions (including both single-cluster), 0.0 when exactly one side
    has zero entropy.
    """
    if average not in ("geometric", "arithmetic"):
        raise ValueError(f"unknown average {average!r}")
    table = contingency_table(pred, truth)
    n = int(table.sum())
    a = table.sum(axis=1)  # predicted-cluster sizes
    b = table.sum(axis=0)  # true-class sizes
    h_pred = _entropy(a, n)
    h_true = _entropy(b, n)
    if h_pred == 0.0 and h_true == 0.0:
        return 1.0
    if h_pred == 0.0 or h_true == 0.0:
        return 0.0
    mi = 0.0
    nz = np.argwhere(table > 0)
    for i, j in nz:
        nij = table[i, j]
        mi += (nij / n) * math.log(n * nij / (a[i] * b[j]))
    mi = max(mi, 0.0)
    if average == "geometric":
        denom = math.sqrt(h_pred * h_true)
    else:
        denom = 0.5 * (h_pred + h_true)
    return min(mi / denom, 1.0)


def ari(pred, truth) -> float:
    """Adjusted Rand index in [-1, 1] via pair counts.

    (Index - Expected) / (Max - Expected); when Max == Expected both
    partitions are trivial and the score is defined as 1.0.
    """
    table = contingency_table(pred, truth)
    n = int(table.sum())
    if n < 2:
        raise ValueError("ARI needs at least 2 samples")

    def comb2(x):
        return x * (x - 1) // 2

    sum_ij = int(sum(comb2(int(v)) for v in table.flat))
    sum_a = int(sum(comb2(int(v)) for v in table.sum(axis=1)))
    sum_b = int(sum(comb2(int(v)) for v in table.sum(axis=0)))
    total = comb2(n)
    # integer arithmetic throughout, one final division:
    # (Index - E) / (Max - E) scaled by 2 * total
    numerator = 2 * (sum_ij * total - sum_a * sum_b)
    denominator = (sum_a + sum_b) * total - 2 * sum_a * sum_b
    if denominator == 0:  # Max == Expected: both partitions trivial
        return 1.0
    return numerator / denominator
