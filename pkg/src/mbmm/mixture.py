"""Multivariate beta mixture model: density, EM fitting and prediction.

Data are ``(N, M)`` float arrays with every entry strictly inside (0, 1).
Responsibilities are ``(N, C)`` row-stochastic arrays. Cluster labels are
0-based everywhere in the Python API.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import _kernels
from .distribution import MBParams, log_normalizer, sample
from .mstep import DEFAULT_BOUNDS, optimize_components

INIT_RANGE = (0.5, 5.0)
EMPTY_CLUSTER_FRACTION = 1e-8
KL_FLOOR = 1e-12


class FitError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class MixtureModel:
    weights: np.ndarray
    components: tuple

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        comps = tuple(self.components)
        if len(comps) < 1 or len(comps) != w.size:
            raise ValueError(f"{w.size} weights for {len(comps)} components")
        if any(not isinstance(c, MBParams) for c in comps):
            raise TypeError("components must be MBParams")
        if len({c.dim for c in comps}) != 1:
            raise ValueError("all components must share the same dimension M")
        if np.any(w < 0) or not np.all(np.isfinite(w)) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights must lie on the probability simplex, got {w}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)

    @property
    def n_components(self):
        return len(self.components)

    @property
    def dim(self):
        return self.components[0].dim

    @property
    def shape_a(self):
        return np.array([c.a for c in self.components])

    @property
    def shape_b(self):
        return np.array([c.b for c in self.components])

    def permuted(self, order):
        """Same mixture with components reordered by ``order``."""
        order = list(order)
        return MixtureModel(self.weights[order], [self.components[k] for k in order])


@dataclass(frozen=True)
class FitConfig:
    n_clusters: int
    max_iter: int = 200
    tol: float = 1e-6
    n_init: int = 10
    seed: int = 0
    param_lower: float = DEFAULT_BOUNDS[0]
    param_upper: float = DEFAULT_BOUNDS[1]

    def __post_init__(self):
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be >= 1")
        if self.max_iter < 1 or self.n_init < 1:
            raise ValueError("max_iter and n_init must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.param_lower < self.param_upper:
            raise ValueError("need 0 < param_lower < param_upper")


@dataclass
class FitReport:
    log_likelihood_trace: list
    n_iter: int
    converged: bool
    best_init_index: int
    seed: int
    #: expected complete-data log-likelihood, paired with log_likelihood_trace
    expected_ll_trace: list = field(default_factory=list)
    restart_log_likelihoods: list = field(default_factory=list)
    n_reinit: int = 0
    n_underflow_rows: int = 0

    @property
    def log_likelihood(self):
        return self.log_likelihood_trace[-1]


def _check_data(data, dim=None):
    X = np.asarray(data, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("data must be a non-empty (N, M) array")
    if dim is not None and X.shape[1] != dim:
        raise ValueError(f"data has M={X.shape[1]}, model has M={dim}")
    if not (np.all(X > 0.0) and np.all(X < 1.0)):
        raise ValueError("every coordinate must lie strictly inside (0, 1)")
    return X


def _weighted_log_density(model, features):
    logx, log1mx, log1ps = features
    log_norm = np.array([log_normalizer(c) for c in model.components])
    L = _kernels.log_density_matrix(logx, log1mx, log1ps, model.shape_a,
                                    model.shape_b, log_norm)
    with np.errstate(divide="ignore"):
        return L + np.log(model.weights)


def _normalise(L):
    """Row-wise responsibilities, per-row log evidence and the underflow count."""
    lse = logsumexp(L, axis=1)
    bad = ~np.isfinite(lse)
    with np.errstate(invalid="ignore"):
        resp = np.exp(L - lse[:, None])
    if bad.any():
        resp[bad] = 1.0 / L.shape[1]
    resp /= resp.sum(axis=1, keepdims=True)
    return resp, lse, int(bad.sum())


def log_prob_matrix(model, data):
    """``(N, C)`` matrix of ``log pi_c + log MB(x_n | theta_c)``."""
    X = _check_data(data, model.dim)
    return _weighted_log_density(model, _kernels.point_features(X))


def mixture_log_pdf(model, x):
    """Log mixture density at one point or at each row of an array."""
    single = np.ndim(x) == 1
    out = logsumexp(log_prob_matrix(model, x), axis=1)
    return float(out[0]) if single else out


def observed_log_likelihood(model, data):
    return float(np.sum(mixture_log_pdf(model, _check_data(data, model.dim))))


def complete_data_log_likelihood(model, data, labels):
    """Log-likelihood with the latent cluster of every point known."""
    labels = np.asarray(labels)
    L = log_prob_matrix(model, data)
    if labels.shape != (L.shape[0],):
        raise ValueError("need one label per data row")
    if labels.size and (labels.min() < 0 or labels.max() >= model.n_components):
        raise ValueError(f"labels must be in 0..{model.n_components - 1}")
    return float(L[np.arange(L.shape[0]), labels].sum())


def e_step(model, data):
    """Posterior cluster probabilities for each row of ``data``.

    Rows whose every component density underflows get a uniform row and a
    ``RuntimeWarning``.
    """
    resp, _, n_bad = _normalise(log_prob_matrix(model, data))
    if n_bad:
        warnings.warn(f"{n_bad} rows underflowed in every component; set uniform",
                      RuntimeWarning, stacklevel=2)
    return resp


predict_proba = e_step


def predict(model, data):
    """Hard assignment; ties go to the lowest cluster index."""
    return np.argmax(predict_proba(model, data), axis=1)


def expected_log_likelihood(model, data, resp):
    L = log_prob_matrix(model, data)
    resp = np.asarray(resp, dtype=float)
    if resp.shape != L.shape:
        raise ValueError(f"resp shape {resp.shape} does not match {L.shape}")
    return float(np.sum(np.where(resp > 0, resp * L, 0.0)))


def update_weights(resp):
    resp = np.asarray(resp, dtype=float)
    w = resp.mean(axis=0)
    return w / w.sum()


def _random_component(rng, dim):
    lo, hi = INIT_RANGE
    return MBParams(rng.uniform(lo, hi, dim), rng.uniform(lo, hi))


def _em_run(X, features, config, rng):
    C, dim = config.n_clusters, X.shape[1]
    bounds = (config.param_lower, config.param_upper)
    model = MixtureModel(np.full(C, 1.0 / C), [_random_component(rng, dim) for _ in range(C)])
    L = _weighted_log_density(model, features)
    resp, lse, n_bad = _normalise(L)
    ll = float(lse.sum())
    if not np.isfinite(ll):
        return None
    trace = [ll]
    q_trace = [float(np.sum(np.where(resp > 0, resp * L, 0.0)))]
    n_reinit = 0
    converged = False
    n_iter = 0
    for n_iter in range(1, config.max_iter + 1):
        weights = update_weights(resp)
        comps = list(model.components)
        empty = resp.sum(axis=0) < EMPTY_CLUSTER_FRACTION * X.shape[0]
        if empty.any():
            for c in np.flatnonzero(empty):
                comps[c] = _random_component(rng, dim)
                weights[c] = 1.0 / (10 * C)
                n_reinit += 1
            weights /= weights.sum()
        comps = optimize_components(X, resp, comps, bounds, features=features)
        model = MixtureModel(weights, comps)
        L = _weighted_log_density(model, features)
        resp, lse, bad = _normalise(L)
        n_bad += bad
        ll = float(lse.sum())
        trace.append(ll)
        q_trace.append(float(np.sum(np.where(resp > 0, resp * L, 0.0))))
        if abs(trace[-1] - trace[-2]) < config.tol:
            converged = True
            break
    return model, resp, trace, q_trace, n_iter, converged, n_reinit, n_bad


def fit(data, config):
    """Fit by EM with ``config.n_init`` random restarts.

    Returns ``(model, responsibilities, report)`` for the restart with the
    highest final observed log-likelihood.
    """
    X = _check_data(data)
    if X.shape[0] < config.n_clusters:
        raise ValueError(f"N={X.shape[0]} is smaller than C={config.n_clusters}")
    features = _kernels.point_features(X)
    children = np.random.SeedSequence(config.seed).spawn(config.n_init)
    best = None
    finals = []
    for r, child in enumerate(children):
        out = _em_run(X, features, config, np.random.default_rng(child))
        if out is None:
            raise FitError(f"non-finite log-likelihood after initialisation "
                           f"(seed={config.seed}, restart={r})")
        finals.append(out[2][-1])
        if best is None or out[2][-1] > best[1][2][-1]:
            best = (r, out)
    r, (model, resp, trace, q_trace, n_iter, converged, n_reinit, n_bad) = best
    report = FitReport(trace, n_iter, converged, r, config.seed, q_trace, finals,
                       n_reinit, n_bad)
    return model, resp, report


def sample_mixture(model, count, seed=None):
    """Generate ``count`` points; returns ``(points, labels)``."""
    count = int(count)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    labels = rng.choice(model.n_components, size=count, p=model.weights)
    X = np.empty((count, model.dim))
    for c, comp in enumerate(model.components):
        rows = np.flatnonzero(labels == c)
        if rows.size:
            X[rows] = sample(comp, rows.size, rng)
    return X, labels


def _smoothed(rows):
    q = np.maximum(rows, KL_FLOOR)
    return q / q.sum(axis=-1, keepdims=True)


def kl_distances(resp, i):
    """KL divergence from responsibility row ``i`` to every row of ``resp``."""
    resp = np.asarray(resp, dtype=float)
    n = resp.shape[0]
    if not -n <= i < n:
        raise IndexError(f"row {i} out of range for {n} rows")
    p = resp[i]
    q = _smoothed(resp)
    nz = p > 0
    d = np.sum(p[nz] * (np.log(p[nz]) - np.log(q[:, nz])), axis=1)
    d = np.maximum(d, 0.0)
    d[np.all(resp == p, axis=1)] = 0.0
    return d


def kl_distance(resp, i, j):
    """KL divergence between the responsibility rows of points ``i`` and ``j``.

    Zero entries of row ``i`` contribute nothing; row ``j`` is floored at
    1e-12 and renormalised first. Not symmetric in ``i`` and ``j``.
    """
    resp = np.asarray(resp, dtype=float)
    n = resp.shape[0]
    for k in (i, j):
        if not -n <= k < n:
            raise IndexError(f"row {k} out of range for {n} rows")
    return float(kl_distances(resp[[i, j]], 0)[1])
