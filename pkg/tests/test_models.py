import math

import numpy as np
import pytest

from robsparse.dataset import Dataset
from robsparse.errors import InputError, ModelConfigurationError
from robsparse.models import (CovarianceModel, CovarianceParams, GlmModel, GlmParams, LogisticModel, MeanModel,
                              MeanParams, ModelId, RegressionModel, RegressionParams, get_model_class)


def _pair_cov(d=3, value=0.3):
    S = np.zeros((d, d))
    S[0, 1] = S[1, 0] = value
    return S


def test_registry():
    assert get_model_class('mean') is MeanModel
    assert get_model_class(ModelId.LOGISTIC) is LogisticModel
    with pytest.raises(ModelConfigurationError):
        get_model_class('poisson')


def test_mean_model():
    model = MeanModel(params=MeanParams(mu=[1.0, 0.0, 0.0]), s=1)
    np.testing.assert_array_equal(model.covariance_map(np.ones(3)), np.eye(3))
    assert model.regularity_constants() == (0.0, 1.0)
    assert model.delta(0.1) == pytest.approx(0.1 * math.sqrt(math.log(10)))
    assert model.delta(0.0) == 0.0
    np.testing.assert_array_equal(model.apply_g([1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])


def test_adapter_validation():
    with pytest.raises(ModelConfigurationError):
        MeanModel(params=MeanParams(mu=[1.0, 1.0, 0.0]), s=1)
    with pytest.raises(ModelConfigurationError):
        MeanModel(params=MeanParams(mu=np.zeros(3)), s=4)
    with pytest.raises(ModelConfigurationError):
        MeanModel(params=RegressionParams(beta=np.zeros(3)), s=1)


def test_dimension_mismatch():
    model = MeanModel(params=MeanParams(mu=np.zeros(3)), s=1)
    with pytest.raises(InputError):
        model.g_batch(Dataset(x=np.zeros((4, 2))))
    with pytest.raises(InputError):
        model.covariance_map(np.zeros(2))


def test_covariance_params_validation():
    with pytest.raises(ModelConfigurationError):
        CovarianceParams(S_mat=np.eye(3))
    S = _pair_cov()
    S[0, 1] = 0.5
    with pytest.raises(ModelConfigurationError):
        CovarianceParams(S_mat=S)
    with pytest.raises(ModelConfigurationError):
        CovarianceParams(S_mat=_pair_cov(value=1.5))


def test_covariance_model_map():
    d = 3
    model = CovarianceModel(params=CovarianceParams(S_mat=_pair_cov(d)), s=2)
    assert model.d_g == 9
    g = model.apply_g([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(g.reshape(3, 3), [[0, 2, 3], [2, 0, 6], [3, 6, 0]])

    F = model.covariance_map(np.zeros(d * d))
    # Sigma = I: var(x_i x_j) = 1 and cov(x_i x_j, x_j x_i) = 1 for i != j
    ij, ji = 0 * d + 1, 1 * d + 0
    assert F[ij, ij] == pytest.approx(1.0)
    assert F[ij, ji] == pytest.approx(1.0)
    diag = np.arange(d) * (d + 1)
    assert np.all(F[diag, :] == 0) and np.all(F[:, diag] == 0)
    np.testing.assert_allclose(F, F.T)


def test_covariance_map_matches_gaussian_fourth_moments():
    model = CovarianceModel(params=CovarianceParams(S_mat=_pair_cov(3, 0.4)), s=2)
    F = model.covariance_map(model.functional())
    sigma = model.params.sigma
    # var(x_0 x_1) = Sigma_00 Sigma_11 + Sigma_01^2
    assert F[1, 1] == pytest.approx(sigma[0, 0] * sigma[1, 1] + sigma[0, 1] ** 2)


def test_regression_model():
    beta = np.array([1.0, 0.0, 0.0, 0.0, 0.0])
    model = RegressionModel(params=RegressionParams(beta=beta), s=1)
    np.testing.assert_allclose(model.covariance_map(np.zeros(5)), np.eye(5))
    np.testing.assert_allclose(model.covariance_map(beta), 2 * np.eye(5) + np.outer(beta, beta))
    np.testing.assert_allclose(model.apply_g((2.0, [1.0, 0.0, -1.0, 0.0, 0.5])), [2.0, 0.0, -2.0, 0.0, 1.0])
    with pytest.raises(InputError):
        model.apply_g([1.0, 2.0, 3.0])


def test_regression_regularity_constants_hold():
    rng = np.random.default_rng(0)
    rho = 2.0
    beta = np.zeros(6)
    beta[:2] = [rho / math.sqrt(2), -rho / math.sqrt(2)]
    model = RegressionModel(params=RegressionParams(beta=beta), s=2)
    L_F, L_cov = model.regularity_constants()
    for _ in range(200):
        theta = rng.standard_normal(6)
        theta *= rho * rng.random() / np.linalg.norm(theta)
        assert np.linalg.norm(model.covariance_map(theta), 2) <= L_cov + 1e-9
        lip = np.linalg.norm(model.covariance_map(theta) - model.covariance_map(beta), 2)
        assert lip <= L_F * np.linalg.norm(theta - beta) + 1e-9


def test_glm_identity_equals_regression():
    beta = np.array([0.6, -0.8, 0.0, 0.0])
    glm = GlmModel(params=GlmParams(beta=beta, link='identity'), s=2)
    reg = RegressionModel(params=RegressionParams(beta=beta), s=2)
    np.testing.assert_allclose(glm.covariance_map(beta), reg.covariance_map(beta), atol=1e-9)
    assert glm.params.slope == pytest.approx(1.0)


def test_glm_keeps_supplied_constants():
    params = GlmParams(beta=[0.5, 0.0], link='tanh', slope=0.7, kappa1=2.0, kappa2=0.1)
    model = GlmModel(params=params, s=1)
    assert (model.params.slope, model.params.kappa1, model.params.kappa2) == (0.7, 2.0, 0.1)


def test_logistic_sampler_gives_binary_labels():
    model = LogisticModel(params=GlmParams(beta=[1.0, 0.0, 0.0], link='sigmoid'), s=1)
    data = model.sample_clean(500, seed=3)
    assert set(np.unique(data.y)) <= {0.0, 1.0}
    assert model.delta(0.1) == pytest.approx(0.1 * math.log(10))


def test_logistic_rejects_unbounded_link():
    # tanh has E[u] = 0, so either kappa1 or the sampler rejects it
    with pytest.raises(ModelConfigurationError):
        model = LogisticModel(params=GlmParams(beta=[3.0, 0.0], link='tanh'), s=1)
        model.sample_clean(200, seed=0)


def test_sample_clean_is_deterministic():
    model = RegressionModel(params=RegressionParams(beta=[1.0, 0.0, 0.0]), s=1)
    first, second = model.sample_clean(50, seed=7), model.sample_clean(50, seed=7)
    np.testing.assert_array_equal(first.x, second.x)
    np.testing.assert_array_equal(first.y, second.y)
    assert np.all(first.labels)
    with pytest.raises(InputError):
        model.sample_clean(0, seed=7)


@pytest.mark.parametrize("model", [
    MeanModel(params=MeanParams(mu=[0.0, 1.0, 0.0, 0.0]), s=1),
    CovarianceModel(params=CovarianceParams(S_mat=_pair_cov(3, 0.3), rho=1.0), s=2),
    GlmModel(params=GlmParams(beta=[0.5, 0.0, 0.0, 0.0], link='tanh', slope=0.7, kappa1=2.0, kappa2=-0.3,
                              rho=1.0), s=1),
], ids=['mean', 'covariance', 'glm'])
def test_regularity_constants_hold(model):
    rng = np.random.default_rng(4)
    L_F, L_cov = model.regularity_constants()

    def draw():
        theta = rng.standard_normal(model.d_g)
        return theta * model.rho * rng.random() / np.linalg.norm(theta)

    for _ in range(200):
        first, second = draw(), draw()
        assert np.linalg.norm(model.covariance_map(first), 2) <= L_cov + 1e-9
        lip = np.linalg.norm(model.covariance_map(first) - model.covariance_map(second), 2)
        assert lip <= L_F * np.linalg.norm(first - second) + 1e-9
