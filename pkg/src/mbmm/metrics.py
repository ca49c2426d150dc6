"""Adjusted Rand index and adjusted mutual information.

Both compare a reference partition with a predicted one through their
contingency table, are symmetric, and ignore how the labels are named.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .specfun import lgamma_array


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray
    row_labels: np.ndarray
    col_labels: np.ndarray

    @property
    def row_sums(self):
        return self.counts.sum(axis=1)

    @property
    def col_sums(self):
        return self.counts.sum(axis=0)

    @property
    def total(self):
        return int(self.counts.sum())


def _labels(reference, predicted):
    ref = np.asarray(reference).reshape(-1)
    pred = np.asarray(predicted).reshape(-1)
    if ref.shape != pred.shape:
        raise ValueError(f"label vectors differ in length: {ref.size} vs {pred.size}")
    if ref.size == 0:
        raise ValueError("need at least one labelled element")
    return ref, pred


def contingency(reference, predicted):
    """Count matrix with reference classes as rows and predicted clusters as columns."""
    ref, pred = _labels(reference, predicted)
    rows, ri = np.unique(ref, return_inverse=True)
    cols, ci = np.unique(pred, return_inverse=True)
    counts = np.bincount(ri * cols.size + ci, minlength=rows.size * cols.size)
    return ContingencyTable(counts.reshape(rows.size, cols.size), rows, cols)


def _same_partition(table):
    # identical up to relabelling: a permutation matrix scaled by block sizes
    c = table.counts
    return c.shape[0] == c.shape[1] and np.count_nonzero(c) == c.shape[0]


def _pairs(v):
    return sum(int(k) * (int(k) - 1) // 2 for k in np.asarray(v).ravel())


def adjusted_rand_index(reference, predicted):
    """Hubert-Arabie ARI.

    Pair counts are exact integers and the result is a single rounded
    division. If the chance-corrected denominator vanishes the result is 1
    for identical partitions and 0 otherwise.
    """
    table = contingency(reference, predicted)
    n = table.total
    total_pairs = n * (n - 1) // 2
    index = _pairs(table.counts)
    sum_a = _pairs(table.row_sums)
    sum_b = _pairs(table.col_sums)
    # (index - E) / (mean(sum_a, sum_b) - E) with E = sum_a * sum_b / total_pairs,
    # multiplied through by 2 * total_pairs
    num = 2 * (total_pairs * index - sum_a * sum_b)
    den = total_pairs * (sum_a + sum_b) - 2 * sum_a * sum_b
    if den == 0:
        return 1.0 if _same_partition(table) else 0.0
    return num / den


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return -math.fsum(p * np.log(p))


def mutual_information(reference, predicted):
    """Mutual information of two labelings in nats."""
    return _mutual_information(contingency(reference, predicted))


def _mutual_information(table):
    n = table.total
    c = table.counts
    i, j = np.nonzero(c)
    nij = c[i, j].astype(float)
    a = table.row_sums[i].astype(float)
    b = table.col_sums[j].astype(float)
    # fsum makes the result independent of row and column order
    return math.fsum(nij / n * (np.log(nij) + np.log(n) - np.log(a) - np.log(b)))


def expected_mutual_information(row_sums, col_sums):
    """E[MI] under the hypergeometric model with both marginals fixed.

    Summed exactly over every feasible cell count; factorials enter through a
    log-gamma table so nothing overflows for large N.
    """
    # E[MI] depends only on the multisets of marginals; sorting fixes the order
    a = np.sort(np.asarray(row_sums, dtype=np.int64))
    b = np.sort(np.asarray(col_sums, dtype=np.int64))
    n = int(a.sum())
    if n != int(b.sum()):
        raise ValueError("row and column sums disagree on N")
    log_fact = lgamma_array(np.arange(1, n + 2, dtype=float))
    return float(_kernels.expected_mutual_info(a, b, n, log_fact))


def adjusted_mutual_information(reference, predicted):
    """AMI with arithmetic-mean entropy normalisation, natural log."""
    table = contingency(reference, predicted)
    if _same_partition(table):
        return 1.0
    if min(table.counts.shape) == 1:
        # a one-block partition carries no information: MI = E[MI] = 0
        return 0.0
    n = table.total
    mi = _mutual_information(table)
    emi = expected_mutual_information(table.row_sums, table.col_sums)
    h_ref = _entropy(table.row_sums, n)
    h_pred = _entropy(table.col_sums, n)
    den = 0.5 * (h_ref + h_pred) - emi
    if abs(den) <= np.finfo(float).eps * max(1.0, h_ref + h_pred):
        return 0.0
    return (mi - emi) / den
