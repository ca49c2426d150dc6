import math

import mpmath
import numpy as np
import pytest

import oracles
from mbmm.distribution import MBParams, log_pdf, sample
from mbmm.metrics import adjusted_rand_index
from mbmm.mixture import (FitConfig, FitError, MixtureModel, complete_data_log_likelihood,
                          e_step, expected_log_likelihood, fit, kl_distance, kl_distances,
                          mixture_log_pdf, observed_log_likelihood, predict, predict_proba,
                          sample_mixture, update_weights)


def random_model(rng, c, m):
    comps = [MBParams(rng.uniform(0.5, 6, m), rng.uniform(0.5, 6)) for _ in range(c)]
    return MixtureModel(rng.dirichlet(np.ones(c)), comps)


@pytest.fixture(scope="module")
def separated():
    model = MixtureModel([0.5, 0.5], [MBParams([12.0, 2.0], 4.0), MBParams([2.0, 12.0], 4.0)])
    X, labels = sample_mixture(model, 2000, 7)
    return model, X, labels


def test_model_validation():
    p = MBParams([1.0], 1.0)
    with pytest.raises(ValueError):
        MixtureModel([0.5, 0.6], [p, p])
    with pytest.raises(ValueError):
        MixtureModel([1.0], [p, p])
    with pytest.raises(ValueError):
        MixtureModel([0.5, 0.5], [p, MBParams([1.0, 1.0], 1.0)])
    with pytest.raises(TypeError):
        MixtureModel([1.0], [(1.0, 1.0)])


def test_config_validation():
    for bad in (dict(n_clusters=0), dict(n_clusters=2, tol=0), dict(n_clusters=2, n_init=0),
                dict(n_clusters=2, param_lower=2, param_upper=1)):
        with pytest.raises(ValueError):
            FitConfig(**bad)


def test_single_component_mixture_equals_component():
    p = MBParams([2.0, 3.0], 1.5)
    x = np.array([0.3, 0.6])
    assert mixture_log_pdf(MixtureModel([1.0], [p]), x) == pytest.approx(log_pdf(p, x),
                                                                         abs=1e-15)


def test_mixture_log_pdf_against_mpmath(rng):
    model = random_model(rng, 2, 2)
    X = rng.uniform(0.02, 0.98, (50, 2))
    got = mixture_log_pdf(model, X)
    comps = [(c.a, c.b) for c in model.components]
    for x, g in zip(X, got):
        ref = float(oracles.mp_mixture_log_pdf(model.weights, comps, x))
        assert g == pytest.approx(ref, abs=1e-10)


def test_observed_log_likelihood(rng):
    model = random_model(rng, 3, 2)
    X = rng.uniform(0.02, 0.98, (100, 2))
    assert observed_log_likelihood(model, X[:1]) == mixture_log_pdf(model, X[0])
    assert observed_log_likelihood(model, np.vstack([X, X])) == pytest.approx(
        2 * observed_log_likelihood(model, X), rel=1e-14)
    naive = sum(math.log(sum(w * math.exp(log_pdf(c, x))
                             for w, c in zip(model.weights, model.components))) for x in X)
    assert observed_log_likelihood(model, X) == pytest.approx(naive, abs=1e-9)


def test_data_validation():
    model = MixtureModel([1.0], [MBParams([1.0, 1.0], 1.0)])
    with pytest.raises(ValueError):
        observed_log_likelihood(model, np.array([[0.5, 1.0]]))
    with pytest.raises(ValueError):
        observed_log_likelihood(model, np.full((2, 3), 0.5))
    with pytest.raises(ValueError):
        observed_log_likelihood(model, np.empty((0, 2)))


def test_complete_data_log_likelihood(rng):
    model = random_model(rng, 3, 2)
    X = rng.uniform(0.02, 0.98, (20, 2))
    z = rng.integers(0, 3, 20)
    direct = sum(math.log(model.weights[k]) + log_pdf(model.components[k], x)
                 for x, k in zip(X, z))
    assert complete_data_log_likelihood(model, X, z) == pytest.approx(direct, abs=1e-10)
    one_hot = np.eye(3)[z]
    assert expected_log_likelihood(model, X, one_hot) == pytest.approx(
        complete_data_log_likelihood(model, X, z), abs=1e-10)
    with pytest.raises(ValueError):
        complete_data_log_likelihood(model, X, np.full(20, 3))


def test_single_component_likelihoods_agree(rng):
    model = random_model(rng, 1, 3)
    X = rng.uniform(0.02, 0.98, (30, 3))
    obs = observed_log_likelihood(model, X)
    assert complete_data_log_likelihood(model, X, np.zeros(30, int)) == pytest.approx(obs,
                                                                                     rel=1e-14)
    assert expected_log_likelihood(model, X, np.ones((30, 1))) == pytest.approx(obs, rel=1e-14)


def test_expected_log_likelihood_double_loop(rng):
    model = random_model(rng, 3, 2)
    X = rng.uniform(0.02, 0.98, (25, 2))
    resp = rng.dirichlet(np.ones(3), 25)
    naive = 0.0
    for n in range(25):
        for c in range(3):
            naive += resp[n, c] * (math.log(model.weights[c]) + log_pdf(model.components[c], X[n]))
    assert expected_log_likelihood(model, X, resp) == pytest.approx(naive, abs=1e-9)
    with pytest.raises(ValueError):
        expected_log_likelihood(model, X, resp[:, :2])


def test_e_step_trivial_cases(rng):
    p = MBParams([2.0, 2.0], 2.0)
    X = rng.uniform(0.05, 0.95, (10, 2))
    assert np.all(e_step(MixtureModel([0.5, 0.5], [p, p]), X) == 0.5)
    assert np.all(e_step(MixtureModel([1.0], [p]), X) == 1.0)


def test_e_step_against_mpmath(rng):
    model = random_model(rng, 3, 2)
    X = rng.uniform(0.02, 0.98, (10, 2))
    resp = e_step(model, X)
    for x, row in zip(X, resp):
        terms = [mpmath.mpf(float(w)) * oracles.mp_pdf(c.a, c.b, x)
                 for w, c in zip(model.weights, model.components)]
        total = mpmath.fsum(terms)
        np.testing.assert_allclose(row, [float(t / total) for t in terms], rtol=0, atol=1e-10)


def test_e_step_underflow_gives_uniform_row(monkeypatch):
    # log-space evaluation does not underflow for valid points, so inject it
    from mbmm import _kernels
    real = _kernels.log_density_matrix

    def patched(*args):
        L = real(*args)
        L[0] = -np.inf
        return L

    monkeypatch.setattr(_kernels, "log_density_matrix", patched)
    model = MixtureModel([0.5, 0.5], [MBParams([5.0], 5.0), MBParams([6.0], 5.0)])
    X = np.array([[0.3], [0.5]])
    with pytest.warns(RuntimeWarning):
        resp = e_step(model, X)
    assert np.all(resp[0] == 0.5)
    assert abs(resp[1].sum() - 1.0) <= 1e-12


def test_rows_sum_to_one(rng):
    model = random_model(rng, 4, 3)
    resp = predict_proba(model, rng.uniform(0.001, 0.999, (1000, 3)))
    assert np.max(np.abs(resp.sum(axis=1) - 1.0)) <= 1e-12


def test_update_weights(rng):
    assert np.allclose(update_weights(np.full((6, 3), 1 / 3)), 1 / 3)
    z = np.array([0, 0, 1, 2, 2, 2])
    np.testing.assert_allclose(update_weights(np.eye(3)[z]), [2 / 6, 1 / 6, 3 / 6])
    resp = rng.dirichlet(np.ones(3), 7)
    cols = [sum(resp[n, c] for n in range(7)) / 7 for c in range(3)]
    np.testing.assert_allclose(update_weights(resp), cols, rtol=1e-14)


def test_predict_tie_and_single_cluster(rng):
    p = MBParams([2.0], 3.0)
    X = rng.uniform(0.05, 0.95, (20, 1))
    assert np.all(predict(MixtureModel([0.5, 0.5], [p, p]), X) == 0)
    assert np.all(predict(MixtureModel([1.0], [p]), X) == 0)


def test_predict_matches_argmax(rng):
    model = random_model(rng, 3, 2)
    X = rng.uniform(0.01, 0.99, (500, 2))
    assert np.array_equal(predict(model, X), np.argmax(predict_proba(model, X), axis=1))


def test_predict_high_density_region():
    model = MixtureModel([0.5, 0.5], [MBParams([40.0], 4.0), MBParams([4.0], 40.0)])
    assert predict(model, np.array([[0.9], [0.1]])).tolist() == [0, 1]


def test_permutation_invariance(rng):
    model = random_model(rng, 3, 2)
    X = rng.uniform(0.01, 0.99, (300, 2))
    order = [2, 0, 1]
    base = predict(model, X)
    permuted = predict(model.permuted(order), X)
    assert np.array_equal(np.asarray(order)[permuted], base)


def test_sample_mixture_labels():
    model = MixtureModel([1.0], [MBParams([2.0], 2.0)])
    assert np.all(sample_mixture(model, 50, 1)[1] == 0)
    model = MixtureModel([0.3, 0.7], [MBParams([2.0], 2.0), MBParams([5.0], 1.0)])
    X, z = sample_mixture(model, 100_000, 2)
    assert abs(np.mean(z == 0) - 0.3) <= 0.01
    X2, z2 = sample_mixture(model, 100_000, 2)
    assert np.array_equal(X, X2) and np.array_equal(z, z2)
    with pytest.raises(ValueError):
        sample_mixture(model, 0, 1)


def test_fit_rejects_bad_input():
    X = np.full((2, 2), 0.5)
    with pytest.raises(ValueError):
        fit(X, FitConfig(3))


def test_fit_reports_non_finite_start(monkeypatch):
    from mbmm import mixture
    monkeypatch.setattr(mixture, "_em_run", lambda *args: None)
    with pytest.raises(FitError, match="seed=4"):
        fit(np.full((5, 1), 0.5), FitConfig(1, seed=4))


def test_single_cluster_recovery():
    X = sample(MBParams([2.0, 3.0], 4.0), 5000, 12)
    model, resp, report = fit(X, FitConfig(1, n_init=2))
    assert model.weights.tolist() == [1.0]
    assert np.all(resp == 1.0)
    comp = model.components[0]
    np.testing.assert_allclose(np.append(comp.a, comp.b), [2.0, 3.0, 4.0], rtol=0.15)


def test_two_cluster_fit(separated):
    _, X, labels = separated
    model, resp, report = fit(X, FitConfig(2, n_init=3, seed=1))
    assert adjusted_rand_index(labels, predict(model, X)) >= 0.95
    assert np.array_equal(resp, predict_proba(model, X))
    trace = np.asarray(report.log_likelihood_trace)
    assert np.all(np.diff(trace) >= -1e-6)
    assert abs(model.weights.sum() - 1.0) <= 1e-12
    assert len(report.restart_log_likelihoods) == 3
    assert report.log_likelihood == max(report.restart_log_likelihoods)
    assert len(report.expected_ll_trace) == len(trace)


def test_fit_is_deterministic(separated):
    _, X, _ = separated
    X = X[:300]
    a = fit(X, FitConfig(2, n_init=2, seed=5))
    b = fit(X, FitConfig(2, n_init=2, seed=5))
    assert a[0].weights.tolist() == b[0].weights.tolist()
    assert a[2].log_likelihood_trace == b[2].log_likelihood_trace


@pytest.mark.parametrize("seed", range(4))
def test_em_ascent_many_seeds(seed):
    rng = np.random.default_rng(seed)
    truth = random_model(rng, 3, 2)
    X, _ = sample_mixture(truth, 400, rng)
    _, _, report = fit(X, FitConfig(3, n_init=1, max_iter=60, seed=seed))
    assert np.all(np.diff(report.log_likelihood_trace) >= -1e-6)


def test_samples_resemble_training_clusters(separated):
    _, X, labels = separated
    model, _, _ = fit(X, FitConfig(2, n_init=3, seed=1))
    pred = predict(model, X)
    Y, z = sample_mixture(model, 20_000, 3)
    for c in range(2):
        assert np.all(np.abs(Y[z == c].mean(axis=0) - X[pred == c].mean(axis=0)) <= 0.05)


def test_kl_distance_values():
    resp = np.array([[1.0, 0.0], [0.5, 0.5], [0.2, 0.8]])
    assert kl_distance(resp, 0, 1) == pytest.approx(math.log(2.0), abs=1e-12)
    assert kl_distance(resp, 1, 1) == 0.0
    expected = 0.5 * math.log(0.5 / 0.2) + 0.5 * math.log(0.5 / 0.8)
    assert kl_distance(resp, 1, 2) == pytest.approx(expected, abs=1e-12)
    # the zero entry of row 0 is floored at 1e-12 before the ratio
    assert kl_distance(resp, 1, 0) == pytest.approx(
        0.5 * math.log(0.5 / 1e-12) + 0.5 * math.log(0.5), rel=1e-9)
    with pytest.raises(IndexError):
        kl_distance(resp, 0, 3)


def test_kl_distances_properties(rng):
    resp = rng.dirichlet(np.full(3, 0.3), 200)
    resp[5] = resp[9]
    for i in (0, 5, 17):
        d = kl_distances(resp, i)
        assert d[i] == 0.0 and np.all(d >= 0)
        assert d[17] == pytest.approx(kl_distance(resp, i, 17), rel=1e-12, abs=1e-15)
    assert kl_distances(resp, 5)[9] == 0.0
