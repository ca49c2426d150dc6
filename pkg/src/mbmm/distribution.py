"""The Jones multivariate beta distribution on the open unit hypercube.

For shape parameters ``a_1..a_M > 0`` and ``b > 0`` the density is

    MB(x | a, b) = prod_m x_m^(a_m - 1) / (1 - x_m)^(a_m + 1)
                   / (1 + sum_k x_k / (1 - x_k))^(b + sum_m a_m) / Z

    Z = Gamma(b) prod_m Gamma(a_m) / Gamma(b + sum_m a_m)

Each marginal is Beta(a_m, b) and all coordinates are positively correlated
through the shared ``b``. Everything here works in log space.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .specfun import lgamma_array

#: coordinates of generated samples are clamped into [SAMPLE_EPS, 1 - SAMPLE_EPS]
SAMPLE_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class MBParams:
    """Shape parameters of one multivariate beta component."""

    a: np.ndarray
    b: float

    def __post_init__(self):
        a = np.array(self.a, dtype=float).reshape(-1)
        b = float(self.b)
        if a.size < 1:
            raise ValueError("need at least one shape parameter a_m")
        if not (np.all(np.isfinite(a)) and np.isfinite(b)):
            raise ValueError("shape parameters must be finite")
        if np.any(a <= 0.0) or b <= 0.0:
            raise ValueError(f"shape parameters must be positive, got a={a}, b={b}")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def dim(self):
        return self.a.shape[0]

    def __eq__(self, other):
        if not isinstance(other, MBParams):
            return NotImplemented
        return self.b == other.b and np.array_equal(self.a, other.a)

    def __repr__(self):
        return f"MBParams(a={self.a.tolist()}, b={self.b})"


def log_normalizer(params):
    """ln Z = ln Gamma(b) + sum_m ln Gamma(a_m) - ln Gamma(b + sum_m a_m)."""
    a = params.a
    lg = lgamma_array(np.concatenate([a, [params.b, params.b + a.sum()]]))
    return float(lg[:-1].sum() - lg[-1])


def _as_points(x, dim):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.ndim != 2 or X.shape[1] != dim:
        raise ValueError(f"point dimension {X.shape[-1]} does not match M={dim}")
    return X, single


def log_pdf(params, x):
    """Log-density at one point (shape ``(M,)``) or at each row of ``(N, M)``.

    Points on or outside the boundary of the hypercube give NaN or infinite
    values; callers are expected to clamp beforehand.
    """
    X, single = _as_points(x, params.dim)
    logx, log1mx, log1ps = _kernels.point_features(X)
    a = params.a
    with np.errstate(invalid="ignore"):
        out = (logx @ (a - 1.0) - log1mx @ (a + 1.0)
               - (params.b + a.sum()) * log1ps - log_normalizer(params))
    return float(out[0]) if single else out


def pdf(params, x):
    """``exp(log_pdf)``. Underflows to 0 far in the tails."""
    return np.exp(log_pdf(params, x))


def sample(params, count, rng_seed=None):
    """Draw ``count`` points as an ``(count, M)`` array.

    Uses ``X_m = G_m / (G_m + G_0)`` with independent ``G_m ~ Gamma(a_m)`` and
    ``G_0 ~ Gamma(b)``, which has exactly the MB density. ``rng_seed`` may be
    an int or a ``numpy.random.Generator``.
    """
    count = int(count)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(rng_seed)
    g = _kernels.gamma_variates(rng, np.concatenate([[params.b], params.a]), count)
    g0 = g[:, :1]
    gm = g[:, 1:]
    with np.errstate(invalid="ignore"):
        X = gm / (gm + g0)
    # both gammas can underflow to 0 for tiny shapes; either end is fine
    X = np.where(np.isnan(X), 0.5, X)
    return np.clip(X, SAMPLE_EPS, 1.0 - SAMPLE_EPS)
