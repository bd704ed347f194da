import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ta2s2.benchmarks import lhs_design
from ta2s2.gp import (LOWER_BOUND, ConfigurationError, DomainError, FactorisationError,
                      HyperParamPoint, IntegratedPosterior, KernelConfig, PriorSpec, TrainingSet,
                      chol_logdet, corr_matrix, factorise, log_prior, neg_log_integrated_posterior,
                      nugget_inverse, nugget_transform, predictive_cov, predictive_moments,
                      sigma_hat_sq, sq_exp_corr)


def logit_nugget(nugget):
    return float(nugget_inverse(nugget))


def test_sq_exp_identity():
    x = np.array([0.3, -1.2, 4.0])
    assert sq_exp_corr(x, x, [0.1, 2.0, 7.0]) == 1.0


@pytest.mark.parametrize("x, x2, phi, expected", [
    ([0.0], [1.0], [1.0], math.exp(-0.5)),
    ([0.0, 0.0], [1.0, 2.0], [1.0, 4.0], math.exp(-1.0)),
])
def test_sq_exp_hand_values(x, x2, phi, expected):
    assert sq_exp_corr(x, x2, phi) == pytest.approx(expected, rel=1e-15)


def test_sq_exp_rejects_nonpositive_lengthscale():
    with pytest.raises(DomainError):
        sq_exp_corr([0.0], [1.0], [0.0])


finite = st.floats(-5, 5, allow_nan=False)


@given(st.lists(st.tuples(finite, finite, st.floats(0.01, 10)), min_size=1, max_size=5))
def test_sq_exp_symmetric_and_monotone(triples):
    x, x2, phi = (np.array(v) for v in zip(*triples))
    k = sq_exp_corr(x, x2, phi)
    assert k == sq_exp_corr(x2, x, phi)
    assert 0.0 <= k <= 1.0
    # pushing one coordinate further away cannot raise the correlation
    far = x2.copy()
    far[0] = x[0] + (abs(x2[0] - x[0]) + 1.0)
    assert sq_exp_corr(x, far, phi) <= k


def test_nugget_transform_values():
    assert nugget_transform(0.0) == pytest.approx(0.5, abs=1e-12)
    assert nugget_transform(2.0) == pytest.approx(0.880797077977882, rel=1e-12)
    assert nugget_transform(-np.inf) == LOWER_BOUND
    assert nugget_transform(-1e6) == pytest.approx(LOWER_BOUND, rel=1e-9)
    assert nugget_transform(1e6) < 1.0 + LOWER_BOUND


@given(st.floats(-20, 20), st.floats(0.01, 5))
def test_nugget_transform_monotone(a, step):
    assert nugget_transform(a) < nugget_transform(a + step)


def test_nugget_strict_monotone_on_grid():
    z = np.linspace(-25, 25, 2001)
    assert np.all(np.diff(nugget_transform(z)) > 0)


def test_nugget_inverse_roundtrip():
    for v in (1e-6, 0.1, 0.5, 0.9):
        assert nugget_transform(nugget_inverse(v)) == pytest.approx(v, rel=1e-10)


def test_corr_matrix_hand():
    ts = TrainingSet([[0.0], [1.0]], [1.0, 1.0])
    hp = HyperParamPoint([0.0], logit_nugget(0.1))
    K = corr_matrix(ts, hp)
    e = math.exp(-0.5)
    np.testing.assert_allclose(K, [[1.1, e], [e, 1.1]], rtol=1e-12)


def test_corr_matrix_duplicate_rows():
    ts = TrainingSet([[0.2, 0.3], [0.2, 0.3], [0.9, 0.1]], [1.0, 1.0, 0.0])
    hp = HyperParamPoint([0.0, 0.0], 0.0)
    K = corr_matrix(ts, hp)
    assert K[0, 1] == 1.0
    assert K[0, 0] == pytest.approx(1.5)
    np.linalg.cholesky(K)


def test_corr_matrix_single_point():
    # TrainingSet rejects n=1, so build the matrix directly
    ts = TrainingSet([[0.0], [5.0]], [0.0, 1.0])
    hp = HyperParamPoint([np.log(1e-6)], 0.0)
    K = corr_matrix(ts, hp)
    assert K[0, 0] == pytest.approx(1.5)
    assert K[0, 1] == 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 50), st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_corr_matrix_symmetric_and_factorisable(n, p, seed):
    rng = np.random.default_rng(seed)
    X = lhs_design(n, p, rng)
    ts = TrainingSet(X, rng.standard_normal(n))
    hp = HyperParamPoint(rng.uniform(-7, 7, p), logit_nugget(1e-6))
    K = corr_matrix(ts, hp)
    assert np.array_equal(K, K.T)
    np.linalg.cholesky(K)


@pytest.mark.parametrize("K, logdet", [
    (np.eye(4), 0.0),
    (np.array([[4.0]]), math.log(4.0)),
    (np.array([[1.0, 0.5], [0.5, 1.0]]), math.log(0.75)),
])
def test_chol_logdet(K, logdet):
    L, ld = chol_logdet(K)
    np.testing.assert_allclose(L @ L.T, K, atol=1e-14)
    assert ld == pytest.approx(logdet, abs=1e-14)


def test_chol_logdet_jitter_ladder():
    K = np.ones((3, 3))  # singular
    with pytest.raises(FactorisationError):
        chol_logdet(K, 0)
    L, _ = chol_logdet(K, 3)
    assert np.all(np.diag(L) > 0)
    with pytest.raises(FactorisationError):
        chol_logdet(-np.eye(2), 3)


def test_sigma_hat_sq():
    ts = TrainingSet([[0.0], [1.0], [2.0]], [1.0, -2.0, 3.0])
    L, _ = chol_logdet(np.eye(3))
    assert sigma_hat_sq(ts, L) == pytest.approx(14.0 / 2)
    zero = TrainingSet([[0.0], [1.0]], [0.0, 0.0])
    assert sigma_hat_sq(zero, np.eye(2)) == 0.0
    ts2 = TrainingSet([[0.0], [1.0]], [1.0, 1.0])
    L, _ = chol_logdet(np.array([[1.0, 0.5], [0.5, 1.0]]))
    assert sigma_hat_sq(ts2, L) == pytest.approx(4.0 / 3.0, rel=1e-14)


def test_neg_log_posterior_hand_composed():
    ts = TrainingSet([[0.0], [1.0]], [1.0, 1.0])
    hp = HyperParamPoint([0.0], 0.0)  # phi = 1, nugget at the sigmoid midpoint
    d = 1.0 + nugget_transform(0.0)
    e = math.exp(-0.5)
    det = d * d - e * e
    quad = (2 * d - 2 * e) / det  # y'K^-1 y for y = (1, 1)
    sigma2 = quad / (2 - 1)
    exponent = (2 - 1) / 2  # (n - p)/2
    # flat nugget prior in z coordinates: -log(s(1-s)) = log 4 at z = 0
    expected = 0.5 * math.log(det) + exponent * math.log(sigma2) + math.log(4.0)
    H = neg_log_integrated_posterior(hp, ts, PriorSpec("uniform_log"))
    assert H == pytest.approx(expected, rel=1e-13)
    assert neg_log_integrated_posterior(hp, ts, PriorSpec("uniform_log")) == H


def test_exponent_conventions():
    rng = np.random.default_rng(3)
    ts = TrainingSet(rng.random((8, 3)), rng.standard_normal(8))
    hp = HyperParamPoint([0.1, -0.5, 0.3], -2.0)
    fac = factorise(ts, hp)
    h_default = neg_log_integrated_posterior(hp, ts, cfg=KernelConfig(exponent_convention="n_minus_p"))
    h_alt = neg_log_integrated_posterior(hp, ts, cfg=KernelConfig(exponent_convention="n_minus_one"))
    assert h_alt - h_default == pytest.approx(0.5 * (3 - 1) * math.log(fac.sigma2), rel=1e-12)
    with pytest.raises(ConfigurationError):
        KernelConfig(exponent_convention="bogus")


def test_prior_shift_moves_H_uniformly():
    rng = np.random.default_rng(1)
    ts = TrainingSet(rng.random((6, 2)), rng.standard_normal(6))
    base = PriorSpec("custom", log_density=lambda lp: -float(np.sum(lp**2)))
    shifted = PriorSpec("custom", log_density=lambda lp: -float(np.sum(lp**2)) + 3.5)
    for theta in rng.uniform(-2, 2, size=(5, 3)):
        hp = HyperParamPoint.from_vector(theta)
        a = neg_log_integrated_posterior(hp, ts, base)
        b = neg_log_integrated_posterior(hp, ts, shifted)
        assert b - a == pytest.approx(-3.5, abs=1e-10)


def test_H_invariant_to_row_permutation():
    rng = np.random.default_rng(7)
    X, y = rng.random((15, 3)), rng.standard_normal(15)
    perm = rng.permutation(15)
    hp = HyperParamPoint([-1.0, 0.2, 1.3], -3.0)
    a = neg_log_integrated_posterior(hp, TrainingSet(X, y))
    b = neg_log_integrated_posterior(hp, TrainingSet(X[perm], y[perm]))
    assert b == pytest.approx(a, rel=1e-8)


def test_log_prior_uniform_box():
    prior = PriorSpec("uniform_log")
    jac = math.log(0.25)
    assert log_prior(HyperParamPoint([0.0, 6.9], 0.0), prior) == pytest.approx(jac)
    assert log_prior(HyperParamPoint([0.0, 7.1], 0.0), prior) == -math.inf
    assert log_prior(HyperParamPoint([-7.5, 0.0], 0.0), prior) == -math.inf


def test_log_prior_exponential_hand():
    lp = log_prior(HyperParamPoint([math.log(5.0)], 0.0), PriorSpec("exponential", mean=5.0))
    assert lp == pytest.approx(-1.0 + math.log(5.0) + math.log(0.25), rel=1e-14)


def test_nugget_prior_is_flat_in_nugget():
    # the z-density times dz/dnugget must be constant
    prior = PriorSpec("uniform_log")
    lb = LOWER_BOUND
    vals = []
    for nug in (0.01, 0.3, 0.7, 0.99):
        z = nugget_inverse(nug)
        s = (nug - lb) / (1 - lb)
        dz_dnug = 1.0 / ((1 - lb) * s * (1 - s))
        vals.append(log_prior(HyperParamPoint([0.0], z), prior) + math.log(dz_dnug))
    np.testing.assert_allclose(vals, vals[0], atol=1e-12)


def test_prior_configuration_errors():
    with pytest.raises(ConfigurationError):
        PriorSpec("reference")
    with pytest.raises(ConfigurationError):
        PriorSpec("custom")


def test_integrated_posterior_maps_failures_to_inf():
    ts = TrainingSet([[0.0], [1.0], [2.0]], [0.0, 1.0, 0.0])
    H = IntegratedPosterior(ts, PriorSpec("uniform_log"))
    assert H([8.0, 0.0]) == math.inf
    assert H([np.nan, 0.0]) == math.inf
    zero = IntegratedPosterior(TrainingSet([[0.0], [1.0]], [0.0, 0.0]))
    assert zero([0.0, 0.0]) == math.inf
    assert math.isfinite(H([0.0, 0.0]))


def test_predictive_mean_hand_two_points():
    ts = TrainingSet([[0.0], [1.0]], [1.0, 1.0])
    nug = 0.1
    hp = HyperParamPoint([0.0], logit_nugget(nug))
    e = math.exp(-0.5)
    t = math.exp(-0.125)
    d = 1 + nug
    # K^-1 y for y = (1,1) is (1,1)/(d+e)
    expected_mu = 2 * t / (d + e)
    fac = factorise(ts, hp)
    mu = float(np.exp(-0.5 * 0.25) * np.sum(fac.alpha))
    assert mu == pytest.approx(expected_mu, rel=1e-12)
    # two runs leave one degree of freedom: variance undefined
    with pytest.raises(DomainError):
        predictive_moments(hp, ts, [0.5])


def test_predictive_moments_against_explicit_inverse():
    rng = np.random.default_rng(11)
    X = rng.random((6, 2))
    y = rng.standard_normal(6)
    ts = TrainingSet(X, y)
    hp = HyperParamPoint([-1.0, 0.5], logit_nugget(0.05))
    xq = np.array([0.4, 0.6])
    phi = np.exp(hp.log_phi)
    K = np.array([[math.exp(-0.5 * np.sum((a - b) ** 2 / phi)) for b in X] for a in X])
    K += 0.05 * np.eye(6)
    Kinv = np.linalg.inv(K)
    t = np.array([math.exp(-0.5 * np.sum((xq - b) ** 2 / phi)) for b in X])
    sigma2 = y @ Kinv @ y / 5
    df = 6 - 2
    mu, s2 = predictive_moments(hp, ts, xq)
    assert mu == pytest.approx(t @ Kinv @ y, rel=1e-10)
    assert s2 == pytest.approx(sigma2 * (1 + 0.05 - t @ Kinv @ t) * df / (df - 2), rel=1e-10)
    assert predictive_cov(hp, ts, xq, xq) == pytest.approx(s2, rel=1e-10)


def test_predictive_interpolates_training_points():
    rng = np.random.default_rng(2)
    X = lhs_design(12, 2, rng)
    y = np.sin(3 * X[:, 0]) + X[:, 1] ** 2 + 1.0
    ts = TrainingSet(X, y)
    hp = HyperParamPoint([np.log(0.05), np.log(0.05)], -np.inf)
    mu, s2 = predictive_moments(hp, ts, X)
    np.testing.assert_allclose(mu, y, rtol=1e-4)
    assert np.all(s2 <= 1e-6 * np.max(s2 + 1))


def test_predictive_reverts_to_prior_far_away():
    rng = np.random.default_rng(4)
    ts = TrainingSet(rng.random((7, 1)), rng.standard_normal(7))
    hp = HyperParamPoint([np.log(0.01)], 0.0)
    fac = factorise(ts, hp)
    df = 7 - 1
    mu, s2 = predictive_moments(hp, ts, [50.0])
    assert mu == pytest.approx(0.0, abs=1e-300)
    assert s2 == pytest.approx(fac.sigma2 * (1 + fac.nugget) * df / (df - 2), rel=1e-12)
