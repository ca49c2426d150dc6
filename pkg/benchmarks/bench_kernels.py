"""Time the numba and numpy implementations of each hot kernel side by side.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Numba compile time is excluded by a warm-up call. Both backends are timed in
the same process through their explicit ``*_numba`` / ``*_numpy`` names, so
``MBMM_DISABLE_NUMBA`` does not need to be set.
"""

import argparse
import math
import time

import numpy as np

from mbmm import _kernels, specfun
from mbmm.specfun import lgamma_array


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    X = rng.uniform(0.01, 0.99, (50_000, 10))
    feats = _kernels.point_features(X)
    A = rng.uniform(0.5, 8, (5, 10))
    B = rng.uniform(0.5, 8, 5)
    norm = rng.normal(size=5)
    yield ("log-density 50000x10, C=5",
           lambda: _kernels.log_density_matrix_numba(*feats, A, B, norm),
           lambda: _kernels.log_density_matrix_numpy(*feats, A, B, norm))

    shapes = np.array([0.3, 1.5, 4.0, 12.0])
    yield ("gamma variates 100000x4",
           lambda: _kernels.gamma_variates_numba(np.random.default_rng(1), shapes, 100_000),
           lambda: _kernels.gamma_variates_numpy(np.random.default_rng(1), shapes, 100_000))

    z = rng.uniform(0.05, 50, 200_000)
    yield ("digamma 200000 values",
           lambda: specfun._digamma_array_numba(z),
           lambda: specfun._digamma_array_numpy(z))

    n = 2000
    a = np.array([700, 800, 500], dtype=np.int64)
    b = np.array([400, 600, 1000], dtype=np.int64)
    log_fact = lgamma_array(np.arange(1, n + 2, dtype=float))
    yield ("expected MI n=2000, 3x3 marginals",
           lambda: _kernels.expected_mutual_info_numba(a, b, n, log_fact),
           lambda: _kernels.expected_mutual_info_numpy(a, b, n, log_fact))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    print(f"{'kernel':<36}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, fast, slow in cases():
        tn, tp = _best(fast, args.repeat), _best(slow, args.repeat)
        ratio = tp / tn if tn > 0 else math.inf
        print(f"{name:<36}{tn * 1e3:>12.2f}{tp * 1e3:>12.2f}{ratio:>9.1f}x")


if __name__ == "__main__":
    main()
