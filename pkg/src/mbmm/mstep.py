"""Per-cluster M-step: maximise the responsibility-weighted log-density.

For one cluster the objective

    f(a, b) = -sum_n gamma_n * log MB(x_n | a, b)

depends on the data only through ``N_c = sum gamma_n`` and the weighted sums
of ``log x``, ``log(1 - x)`` and ``log1p(S)``. Those are collected once per
problem; every objective and gradient evaluation afterwards is O(M).

The search runs over ``u = log(params)`` so the positivity box becomes a plain
box in ``u``. Directions come from L-BFGS with the usual two-loop recursion and
steps are projected back into the box with an Armijo backtracking rule.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .distribution import MBParams
from .specfun import digamma_array, lgamma_array

DEFAULT_BOUNDS = (1e-3, 1e4)
MAX_INNER_ITER = 50
GRAD_TOL = 1e-6
HISTORY = 10
ARMIJO_C = 1e-4
MAX_BACKTRACK = 40
FLAT_RTOL = 1e-14


class MStepWarning(RuntimeWarning):
    """The inner optimiser produced a non-finite iterate; start kept."""


@dataclass
class MStepProblem:
    """One cluster's subproblem.

    ``features`` may carry the output of ``point_features(data)`` so repeated
    problems over the same data skip the log transforms.
    """

    data: np.ndarray
    resp_column: np.ndarray
    bounds: tuple = DEFAULT_BOUNDS
    start: MBParams = None
    features: tuple = field(default=None, repr=False)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        self.resp_column = np.asarray(self.resp_column, dtype=float)
        if self.resp_column.shape != (self.data.shape[0],):
            raise ValueError("resp_column must have one entry per data row")
        lo, hi = map(float, self.bounds)
        if not 0.0 < lo < hi:
            raise ValueError(f"need 0 < lower < upper, got {self.bounds}")
        self.bounds = (lo, hi)
        if self.features is None:
            self.features = _kernels.point_features(self.data)
        logx, log1mx, log1ps = self.features
        w = self.resp_column
        # correctly rounded sums do not depend on row order
        self.weight = math.fsum(w)
        self.sum_logx = np.array([math.fsum(col) for col in (w[:, None] * logx).T])
        self.sum_log1mx = np.array([math.fsum(col) for col in (w[:, None] * log1mx).T])
        self.sum_log1ps = math.fsum(w * log1ps)

    @property
    def dim(self):
        return self.data.shape[1]


def _unpack(theta):
    return theta[:-1], theta[-1]


def _objective_theta(problem, theta):
    a, b = _unpack(theta)
    total = b + a.sum()
    lg = lgamma_array(np.append(theta, total))
    log_norm = lg[:-1].sum() - lg[-1]
    val = -((a - 1.0) @ problem.sum_logx - (a + 1.0) @ problem.sum_log1mx
            - total * problem.sum_log1ps - problem.weight * log_norm)
    return val if np.isfinite(val) else np.inf


def _gradient_theta(problem, theta):
    a, b = _unpack(theta)
    total = b + a.sum()
    psi = digamma_array(np.append(theta, total))
    psi_total = psi[-1]
    grad = np.empty_like(theta)
    grad[:-1] = (problem.sum_logx - problem.sum_log1mx - problem.sum_log1ps
                 - problem.weight * (psi[:-2] - psi_total))
    grad[-1] = -problem.sum_log1ps - problem.weight * (psi[-2] - psi_total)
    return -grad


def _theta(params):
    return np.append(params.a, params.b)


def objective(problem, params):
    """Negated weighted log-likelihood of ``params``; ``inf`` if not finite."""
    if params.dim != problem.dim:
        raise ValueError(f"params have M={params.dim}, data has M={problem.dim}")
    return float(_objective_theta(problem, _theta(params)))


def gradient(problem, params):
    """Gradient of :func:`objective` with respect to ``(a_1..a_M, b)``."""
    if params.dim != problem.dim:
        raise ValueError(f"params have M={params.dim}, data has M={problem.dim}")
    return _gradient_theta(problem, _theta(params))


def _two_loop(g, s_hist, y_hist):
    q = g.copy()
    alphas = []
    for s, y in zip(reversed(s_hist), reversed(y_hist)):
        rho = 1.0 / (y @ s)
        alpha = rho * (s @ q)
        q -= alpha * y
        alphas.append((rho, alpha))
    s, y = s_hist[-1], y_hist[-1]
    q *= (s @ y) / (y @ y)
    for (s, y), (rho, alpha) in zip(zip(s_hist, y_hist), reversed(alphas)):
        q += s * (alpha - rho * (y @ q))
    return -q


def minimize_box(problem, start, max_iter=MAX_INNER_ITER, grad_tol=GRAD_TOL):
    """Projected L-BFGS over log-parameters, started from ``start``.

    Returns ``(params, status)`` where status is ``"converged"``,
    ``"max_iter"``, ``"stalled"`` or ``"diverged"``. No acceptance guard is
    applied here.
    """
    lo, hi = np.log(problem.bounds[0]), np.log(problem.bounds[1])

    def f_and_g(u):
        theta = np.exp(u)
        val = _objective_theta(problem, theta)
        if not np.isfinite(val):
            return np.inf, None
        return val, _gradient_theta(problem, theta) * theta

    u = np.clip(np.log(_theta(start)), lo, hi)
    f, g = f_and_g(u)
    if g is None:
        return start, "diverged"
    s_hist, y_hist = [], []
    status = "max_iter"
    for _ in range(max_iter):
        proj = u - np.clip(u - g, lo, hi)
        if np.max(np.abs(proj)) < grad_tol:
            status = "converged"
            break
        pinned = ((u <= lo) & (g > 0)) | ((u >= hi) & (g < 0))
        if s_hist:
            d = _two_loop(g, s_hist, y_hist)
        else:
            d = -g / max(1.0, np.linalg.norm(g))
        d[pinned] = 0.0
        if d @ g >= 0.0:
            d = np.where(pinned, 0.0, -g) / max(1.0, np.linalg.norm(g))
        t = 1.0
        for _ in range(MAX_BACKTRACK):
            u_new = np.clip(u + t * d, lo, hi)
            f_new, g_new = f_and_g(u_new)
            if f_new <= f + ARMIJO_C * (g @ (u_new - u)):
                break
            t *= 0.5
        else:
            status = "stalled"
            break
        if not np.all(np.isfinite(u_new)) or g_new is None:
            return start, "diverged"
        flat = f - f_new <= FLAT_RTOL * max(1.0, abs(f))
        s, y = u_new - u, g_new - g
        if s @ y > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            s_hist.append(s)
            y_hist.append(y)
            if len(s_hist) > HISTORY:
                del s_hist[0], y_hist[0]
        u, f, g = u_new, f_new, g_new
        if flat:
            # no decrease above rounding level; the gradient test cannot be met
            status = "converged"
            break
    theta = np.clip(np.exp(u), problem.bounds[0], problem.bounds[1])
    if not np.all(np.isfinite(theta)):
        return start, "diverged"
    a, b = _unpack(theta)
    return MBParams(a, b), status


def optimize_component(problem, start=None):
    """Improve one cluster's parameters; never returns a worse objective."""
    start = problem.start if start is None else start
    candidate, status = minimize_box(problem, start)
    if status == "diverged":
        warnings.warn(f"M-step diverged from {start!r}; keeping start", MStepWarning,
                      stacklevel=2)
        return start
    if objective(problem, candidate) <= objective(problem, start):
        return candidate
    return start


def optimize_components(data, resp, components, bounds=DEFAULT_BOUNDS, features=None):
    """Run the guarded per-cluster update for every column of ``resp``.

    ``components`` is the current list of :class:`MBParams`. Clusters are
    independent, so the result equals optimising each one on its own.
    """
    resp = np.asarray(resp, dtype=float)
    if features is None:
        features = _kernels.point_features(data)
    if resp.shape[1] != len(components):
        raise ValueError(f"resp has {resp.shape[1]} columns for {len(components)} components")
    out = []
    for c, start in enumerate(components):
        problem = MStepProblem(data, resp[:, c], bounds, start, features=features)
        out.append(optimize_component(problem))
    return out
