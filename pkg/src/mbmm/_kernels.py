"""Inner loops with paired numba / numpy implementations.

The public names at the bottom resolve to one backend according to
``mbmm._accel.USE_NUMBA``. The paired implementations must agree to rounding
error; the random-variate kernel only has to agree in distribution, because
the two paths consume the generator stream in a different order.
"""

import math

import numpy as np

from ._accel import njit, pick


# ---------------------------------------------------------------------------
# per-point sufficient features and the N x C component log-density matrix


def point_features(X):
    """Return ``(log x, log(1 - x), log1p(sum_k x_k / (1 - x_k)))`` for rows of X."""
    X = np.asarray(X, dtype=float)
    logx = np.log(X)
    log1mx = np.log1p(-X)
    log1ps = np.log1p(np.sum(X / (1.0 - X), axis=-1))
    return logx, log1mx, log1ps


@njit
def _log_density_matrix_numba(logx, log1mx, log1ps, A, B, log_norm):
    n, m = logx.shape
    c = A.shape[0]
    out = np.empty((n, c))
    for k in range(c):
        total = B[k]
        for j in range(m):
            total += A[k, j]
        for i in range(n):
            acc = 0.0
            for j in range(m):
                acc += (A[k, j] - 1.0) * logx[i, j] - (A[k, j] + 1.0) * log1mx[i, j]
            out[i, k] = acc - total * log1ps[i] - log_norm[k]
    return out


def _log_density_matrix_numpy(logx, log1mx, log1ps, A, B, log_norm):
    total = B + A.sum(axis=1)
    return (logx @ (A - 1.0).T - log1mx @ (A + 1.0).T
            - np.outer(log1ps, total) - log_norm)


# ---------------------------------------------------------------------------
# Marsaglia-Tsang gamma variates, unit scale


@njit
def _gamma_one(rng, shape):
    boost = 1.0
    if shape < 1.0:
        # G_a = G_{a+1} * U^(1/a)
        boost = rng.random() ** (1.0 / shape)
        shape += 1.0
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = rng.standard_normal()
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = rng.random()
        x2 = x * x
        if u < 1.0 - 0.0331 * x2 * x2:
            return d * v * boost
        if math.log(u) < 0.5 * x2 + d * (1.0 - v + math.log(v)):
            return d * v * boost


@njit
def _gamma_variates_numba(rng, shapes, count):
    k = shapes.shape[0]
    out = np.empty((count, k))
    for i in range(count):
        for j in range(k):
            out[i, j] = _gamma_one(rng, shapes[j])
    return out


def _gamma_column_numpy(rng, shape, count):
    boost = np.ones(count)
    if shape < 1.0:
        boost = rng.random(count) ** (1.0 / shape)
        shape += 1.0
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(count)
    todo = np.arange(count)
    while todo.size:
        x = rng.standard_normal(todo.size)
        v = 1.0 + c * x
        u = rng.random(todo.size)
        pos = v > 0.0
        v3 = np.where(pos, v, 1.0) ** 3
        x2 = x * x
        with np.errstate(divide="ignore"):
            ok = pos & ((u < 1.0 - 0.0331 * x2 * x2)
                        | (np.log(u) < 0.5 * x2 + d * (1.0 - v3 + np.log(v3))))
        out[todo[ok]] = d * v3[ok]
        todo = todo[~ok]
    return out * boost


def _gamma_variates_numpy(rng, shapes, count):
    return np.column_stack([_gamma_column_numpy(rng, float(s), count) for s in shapes])


# ---------------------------------------------------------------------------
# expected mutual information under the hypergeometric permutation model


@njit
def _expected_mutual_info_numba(a, b, n, log_fact):
    emi = 0.0
    log_n = math.log(n)
    for i in range(a.shape[0]):
        ai = a[i]
        for j in range(b.shape[0]):
            bj = b[j]
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            base = (log_fact[ai] + log_fact[bj] + log_fact[n - ai] + log_fact[n - bj]
                    - log_fact[n])
            for nij in range(lo, hi + 1):
                log_p = (base - log_fact[nij] - log_fact[ai - nij] - log_fact[bj - nij]
                         - log_fact[n - ai - bj + nij])
                term = math.log(nij) + log_n - math.log(ai) - math.log(bj)
                emi += nij / n * term * math.exp(log_p)
    return emi


def _expected_mutual_info_numpy(a, b, n, log_fact):
    emi = 0.0
    log_n = math.log(n)
    for ai in a:
        for bj in b:
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            if hi < lo:
                continue
            nij = np.arange(lo, hi + 1)
            log_p = (log_fact[ai] + log_fact[bj] + log_fact[n - ai] + log_fact[n - bj]
                     - log_fact[n] - log_fact[nij] - log_fact[ai - nij]
                     - log_fact[bj - nij] - log_fact[n - ai - bj + nij])
            term = np.log(nij) + log_n - math.log(ai) - math.log(bj)
            emi += float(np.sum(nij / n * term * np.exp(log_p)))
    return emi


log_density_matrix_numba = _log_density_matrix_numba
log_density_matrix_numpy = _log_density_matrix_numpy
gamma_variates_numba = _gamma_variates_numba
gamma_variates_numpy = _gamma_variates_numpy
expected_mutual_info_numba = _expected_mutual_info_numba
expected_mutual_info_numpy = _expected_mutual_info_numpy

log_density_matrix = pick(_log_density_matrix_numba, _log_density_matrix_numpy)
gamma_variates = pick(_gamma_variates_numba, _gamma_variates_numpy)
expected_mutual_info = pick(_expected_mutual_info_numba, _expected_mutual_info_numpy)
