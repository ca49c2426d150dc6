import math

import numpy as np
import pytest
from scipy import stats

import oracles
from mbmm import _kernels
from mbmm.distribution import SAMPLE_EPS, MBParams, log_normalizer, log_pdf, pdf, sample


def test_params_validation():
    with pytest.raises(ValueError):
        MBParams([], 1.0)
    with pytest.raises(ValueError):
        MBParams([1.0, -1.0], 1.0)
    with pytest.raises(ValueError):
        MBParams([1.0], 0.0)
    with pytest.raises(ValueError):
        MBParams([np.inf], 1.0)
    p = MBParams([1, 2], 3)
    assert p.dim == 2 and p.b == 3.0
    with pytest.raises(ValueError):
        p.a[0] = 5.0


@pytest.mark.parametrize("a, b, expected", [
    ([1.0], 1.0, 0.0),
    ([1.0, 1.0], 1.0, -math.log(2.0)),
])
def test_log_normalizer_trivial(a, b, expected):
    assert log_normalizer(MBParams(a, b)) == pytest.approx(expected, abs=1e-15)


def test_log_normalizer_against_mpmath():
    # 50-digit value: -4.2263541425745676016
    got = log_normalizer(MBParams([2.0, 0.5, 1.3], 2.2))
    assert got == pytest.approx(-4.2263541425745676016, rel=1e-10)
    assert got == pytest.approx(float(oracles.mp_log_normalizer([2, .5, 1.3], 2.2)), rel=1e-10)


def test_uniform_case():
    assert log_pdf(MBParams([1.0], 1.0), [0.37]) == pytest.approx(0.0, abs=1e-15)
    assert pdf(MBParams([1.0], 1.0), [0.9]) == pytest.approx(1.0, abs=1e-14)


def test_univariate_reduces_to_beta():
    assert log_pdf(MBParams([2.0], 3.0), [0.5]) == pytest.approx(math.log(1.5), abs=1e-14)
    xs = np.linspace(0.001, 0.999, 500)[:, None]
    for a, b in [(0.7, 2.5), (3.0, 0.6), (5.5, 5.5)]:
        np.testing.assert_allclose(log_pdf(MBParams([a], b), xs),
                                   stats.beta.logpdf(xs[:, 0], a, b), rtol=0, atol=1e-12)


def test_pdf_is_exp_of_log_pdf(rng):
    for _ in range(100):
        m = rng.integers(1, 5)
        p = MBParams(rng.uniform(0.3, 6, m), rng.uniform(0.3, 6))
        x = rng.uniform(0.01, 0.99, m)
        assert pdf(p, x) == pytest.approx(math.exp(log_pdf(p, x)), rel=1e-15)


def test_pdf_against_direct_formula():
    got = pdf(MBParams([5.0, 5.0], 5.0), [0.5, 0.5])
    assert got == pytest.approx(7.031950238439764088, rel=1e-12)
    assert got == pytest.approx(float(oracles.mp_pdf([5, 5], 5, [.5, .5])), rel=1e-12)


def test_pdf_against_direct_formula_random_points(rng):
    for _ in range(30):
        m = rng.integers(1, 4)
        a, b = rng.uniform(0.3, 8, m), rng.uniform(0.3, 8)
        x = rng.uniform(0.001, 0.999, m)
        ref = float(mpmath_log(oracles.mp_pdf(a, b, x)))
        assert log_pdf(MBParams(a, b), x) == pytest.approx(ref, rel=1e-11, abs=1e-11)


def mpmath_log(v):
    import mpmath
    return mpmath.log(v)


def test_point_batch_and_dimension_check():
    p = MBParams([2.0, 3.0], 1.5)
    X = np.array([[0.2, 0.3], [0.6, 0.1]])
    out = log_pdf(p, X)
    assert out.shape == (2,)
    assert out[1] == log_pdf(p, X[1])
    with pytest.raises(ValueError):
        log_pdf(p, [0.2, 0.3, 0.4])


def test_quadrature_2d_plain_midpoint():
    p = MBParams([2.0, 3.0], 1.5)
    total = oracles.plain_midpoint_integral(lambda X: pdf(p, X), n=400)
    assert abs(total - 1.0) <= 1e-3


@pytest.mark.parametrize("dim", [1, 2])
def test_normalisation_random_parameters(rng, dim):
    for _ in range(20):
        p = MBParams(rng.uniform(0.5, 8, dim), rng.uniform(0.5, 8))
        assert abs(oracles.midpoint_integral(lambda X: pdf(p, X), dim) - 1.0) <= 1e-3


def test_support_is_whole_cube():
    p = MBParams([2.0, 2.0, 2.0], 1.0)
    v = pdf(p, [0.9, 0.9, 0.9])
    assert np.isfinite(v) and v > 0


def test_sample_uniform_mean():
    X = sample(MBParams([1.0], 1.0), 100_000, 1)
    assert abs(X.mean() - 0.5) <= 0.005


def test_sample_marginal_mean():
    X = sample(MBParams([2.0, 3.0], 4.0), 100_000, 2)
    assert abs(X[:, 0].mean() - 2.0 / 6.0) <= 0.01
    assert abs(X[:, 1].mean() - 3.0 / 7.0) <= 0.01


def test_sample_positive_correlation():
    X = sample(MBParams([2.0, 2.0], 1.0), 100_000, 3)
    assert np.corrcoef(X.T)[0, 1] > 0


def test_sample_deterministic_and_clamped():
    p = MBParams([0.05, 3.0], 0.05)
    a, b = sample(p, 2000, 11), sample(p, 2000, 11)
    assert np.array_equal(a, b)
    assert a.min() >= SAMPLE_EPS and a.max() <= 1 - SAMPLE_EPS


def test_sample_rejects_bad_count():
    with pytest.raises(ValueError):
        sample(MBParams([1.0], 1.0), 0, 1)


@pytest.mark.parametrize("impl", [_kernels.gamma_variates_numba, _kernels.gamma_variates_numpy])
def test_gamma_variates_moments(impl):
    shapes = np.array([0.2, 0.9, 1.0, 4.5, 30.0])
    g = impl(np.random.default_rng(5), shapes, 200_000)
    assert np.all(g >= 0)
    np.testing.assert_allclose(g.mean(axis=0), shapes, rtol=0.02)
    np.testing.assert_allclose(g.var(axis=0), shapes, rtol=0.05)


def test_ks_p_values_look_uniform():
    # over many independent marginals the KS p-values of an exact sampler are
    # uniform; a biased sampler piles them up near zero
    rng = np.random.default_rng(99)
    pvals = []
    for _ in range(40):
        a, b = rng.uniform(0.5, 8, 2), rng.uniform(0.5, 8)
        X = sample(MBParams(a, b), 20_000, rng)
        pvals += [stats.kstest(X[:, m], stats.beta(a[m], b).cdf).pvalue for m in range(2)]
    assert stats.kstest(pvals, "uniform").pvalue > 0.01
