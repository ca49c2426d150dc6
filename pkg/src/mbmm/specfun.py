"""Log-gamma and digamma for positive real arguments.

Scalar entry points validate their input and raise ``ValueError`` outside the
domain. The ``*_array`` kernels skip validation and return NaN for invalid
entries; they are what the density and gradient code call.
"""

import math

import numpy as np

from ._accel import njit, pick

# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.91893853320467274178
_EULER = 0.57721566490153286061

# zeta(k) - 1 for k = 2..21; used by the series for ln Gamma(1 + z) near the
# two roots of ln Gamma, where the Lanczos form loses relative accuracy.
_ZETA_M1 = np.array([
    0.64493406684822643647, 0.2020569031595942854, 0.082323233711138191516,
    0.036927755143369926331, 0.017343061984449139715, 0.0083492773819228268398,
    0.0040773561979443393787, 0.0020083928260822144179, 0.00099457512781808533715,
    0.0004941886041194645587, 0.00024608655330804829864, 0.00012271334757848914675,
    6.1248135058704829259e-5, 3.0588236307020493552e-5, 1.5282259408651871733e-5,
    7.6371976378997622736e-6, 3.8172932649998398565e-6, 1.9082127165539389257e-6,
    9.5396203387279611315e-7, 4.7693298678780646312e-7,
])
_NEAR_ROOT = 0.25

# Asymptotic digamma tail: B_2k / (2k) for k = 1..7.
_DIGAMMA_ASYM = np.array([
    1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0, 1.0 / 132.0,
    -691.0 / 32760.0, 1.0 / 12.0,
])
_DIGAMMA_SHIFT = 6.0


@njit
def _lgamma1p_series(z):
    # ln Gamma(1 + z) for |z| <= 0.25
    acc = 0.0
    zk = -z
    for i in range(_ZETA_M1.shape[0]):
        zk *= -z
        acc += _ZETA_M1[i] * zk / (i + 2)
    return acc - math.log1p(z) + z * (1.0 - _EULER)


@njit
def _lgamma_lanczos(x):
    z = x - 1.0
    s = _LANCZOS[0]
    for i in range(1, _LANCZOS.shape[0]):
        s += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(s)


@njit
def lgamma_scalar(x):
    """ln Gamma(x) for x > 0 without argument checks (NaN otherwise)."""
    if not (x > 0.0) or x == math.inf:
        return math.nan
    shift = 0.0
    if x < 0.5:
        # Gamma(x) = Gamma(x + 1) / x; x + 1 lands in the series window or
        # in [1.25, 1.5) where Lanczos is accurate
        shift = -math.log(x)
        x += 1.0
    if abs(x - 1.0) <= _NEAR_ROOT:
        return shift + _lgamma1p_series(x - 1.0)
    if abs(x - 2.0) <= _NEAR_ROOT:
        z = x - 2.0
        return shift + math.log1p(z) + _lgamma1p_series(z)
    return shift + _lgamma_lanczos(x)


@njit
def digamma_scalar(x):
    """psi(x) for x > 0 without argument checks (NaN otherwise)."""
    if not (x > 0.0) or x == math.inf:
        return math.nan
    acc = 0.0
    while x < _DIGAMMA_SHIFT:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = 0.0
    p = inv2
    for i in range(_DIGAMMA_ASYM.shape[0]):
        tail += _DIGAMMA_ASYM[i] * p
        p *= inv2
    return acc + math.log(x) - 0.5 / x - tail


@njit
def _lgamma_array_numba(x):
    flat = x.ravel()
    out = np.empty(flat.shape[0])
    for i in range(flat.shape[0]):
        out[i] = lgamma_scalar(flat[i])
    return out.reshape(x.shape)


@njit
def _digamma_array_numba(x):
    flat = x.ravel()
    out = np.empty(flat.shape[0])
    for i in range(flat.shape[0]):
        out[i] = digamma_scalar(flat[i])
    return out.reshape(x.shape)


def _lgamma1p_series_numpy(z):
    acc = np.zeros_like(z)
    zk = -z
    for i, c in enumerate(_ZETA_M1):
        zk = zk * -z
        acc += c * zk / (i + 2)
    return acc - np.log1p(z) + z * (1.0 - _EULER)


def _lgamma_lanczos_numpy(x):
    z = x - 1.0
    s = np.full_like(z, _LANCZOS[0])
    for i in range(1, len(_LANCZOS)):
        s += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(s)


def _lgamma_array_numpy(x):
    x = np.asarray(x, dtype=float)
    bad = ~(x > 0.0) | np.isinf(x)
    xs = np.where(bad, 3.0, x)
    small = xs < 0.5
    shift = np.where(small, -np.log(np.where(small, xs, 1.0)), 0.0)
    xs = np.where(small, xs + 1.0, xs)

    out = np.empty_like(xs)
    near1 = np.abs(xs - 1.0) <= _NEAR_ROOT
    near2 = np.abs(xs - 2.0) <= _NEAR_ROOT
    rest = ~(near1 | near2)
    out[near1] = _lgamma1p_series_numpy(xs[near1] - 1.0)
    z2 = xs[near2] - 2.0
    out[near2] = np.log1p(z2) + _lgamma1p_series_numpy(z2)
    out[rest] = _lgamma_lanczos_numpy(xs[rest])
    out = out + shift
    out[bad] = np.nan
    return out


def _digamma_array_numpy(x):
    x = np.asarray(x, dtype=float)
    bad = ~(x > 0.0) | np.isinf(x)
    xs = np.where(bad, 10.0, x)
    acc = np.zeros_like(xs)
    # at most ceil(_DIGAMMA_SHIFT) upward steps are ever needed for x > 0
    for _ in range(int(_DIGAMMA_SHIFT)):
        low = xs < _DIGAMMA_SHIFT
        if not low.any():
            break
        acc -= np.where(low, 1.0 / xs, 0.0)
        xs = np.where(low, xs + 1.0, xs)
    inv2 = 1.0 / (xs * xs)
    tail = np.zeros_like(xs)
    p = inv2
    for c in _DIGAMMA_ASYM:
        tail += c * p
        p = p * inv2
    out = acc + np.log(xs) - 0.5 / xs - tail
    out[bad] = np.nan
    return out


lgamma_array_numba = _lgamma_array_numba
lgamma_array_numpy = _lgamma_array_numpy
digamma_array_numba = _digamma_array_numba
digamma_array_numpy = _digamma_array_numpy

_lgamma_array = pick(_lgamma_array_numba, _lgamma_array_numpy)
_digamma_array = pick(_digamma_array_numba, _digamma_array_numpy)


def lgamma_array(x):
    """Elementwise ln Gamma over an array; NaN where the argument is invalid."""
    return _lgamma_array(np.ascontiguousarray(x, dtype=float))


def digamma_array(x):
    """Elementwise digamma over an array; NaN where the argument is invalid."""
    return _digamma_array(np.ascontiguousarray(x, dtype=float))


def _check_domain(x, name):
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"{name} is defined for finite x > 0, got {x!r}")
    return x


def log_gamma(x):
    """Natural log of the gamma function for finite ``x > 0``.

    >>> log_gamma(1.0)
    0.0
    >>> round(log_gamma(10.0), 10)
    12.8018274801
    """
    return float(lgamma_scalar(_check_domain(x, "log_gamma")))


def digamma(x):
    """Derivative of :func:`log_gamma` for finite ``x > 0``."""
    return float(digamma_scalar(_check_domain(x, "digamma")))
