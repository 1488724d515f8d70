import numpy as np
import pytest

from robsparse.config import DEFAULT_CONFIG
from robsparse.dataset import Dataset
from robsparse.ellipsoid import Termination
from robsparse.errors import InputError
from robsparse.estimator import EstimatorConfig, difference_batch, estimate_functional, joint_mean_cov_estimate
from robsparse.helpers import make_rng
from robsparse.models import CovarianceModel, CovarianceParams, MeanModel, MeanParams
from robsparse.oracle import sampling_level
from robsparse.thresholding import top_k


def _mean_model(d=10):
    mu = np.zeros(d)
    mu[3] = 2.0
    return MeanModel(params=MeanParams(mu=mu), s=1)


def test_config_from_dictionary():
    config = EstimatorConfig.from_config({'pruning': {'c_prune': 3.0}, 'ellipsoid': {'radius': 5.0}},
                                         tau_sep=None, max_iters=50)
    assert config.c_prune == 3.0
    assert config.radius == 5.0
    assert config.tau_sep is None
    assert config.max_iters == 50
    assert config.ellipsoid_config().max_iters == 50


def test_clean_estimate():
    model = _mean_model()
    data = model.sample_clean(500, seed=0)
    data.epsilon = 0.1
    bundle = estimate_functional(data, model, EstimatorConfig(tau_sep=5.0))
    assert bundle.terminated_by is Termination.ORACLE_YES
    assert np.linalg.norm(bundle.theta_hat - model.functional()) < 0.3
    np.testing.assert_array_equal(bundle.kept_indices, np.arange(500))


def test_gross_outliers_are_pruned_before_weighting():
    model = _mean_model()
    clean = model.sample_clean(480, seed=1)
    x = np.vstack([clean.x, np.tile(1000.0 * np.eye(10)[0], (20, 1))])
    data = Dataset(x=x, epsilon=0.1)
    bundle = estimate_functional(data, model, EstimatorConfig(tau_sep=5.0))
    np.testing.assert_array_equal(bundle.kept_indices, np.arange(480))
    assert len(bundle.weights) == 480
    assert np.linalg.norm(bundle.theta_hat - model.functional()) < 0.3


def test_difference_batch():
    first = Dataset(x=[[2.0, 0.0], [1.0, 1.0]], labels=[True, False], epsilon=0.1)
    second = Dataset(x=[[0.0, 0.0], [1.0, -1.0]], labels=[True, True], epsilon=0.1)
    diff = difference_batch(first, second)
    np.testing.assert_allclose(diff.x, [[np.sqrt(2), 0.0], [0.0, np.sqrt(2)]])
    np.testing.assert_array_equal(diff.labels, [True, False])
    assert diff.epsilon == pytest.approx(0.2)
    with pytest.raises(InputError):
        difference_batch(first, Dataset(x=[[0.0, 0.0]]))


def test_joint_mean_and_covariance():
    d = 4
    mu = np.array([0.0, 1.5, 0.0, 0.0])
    sigma = np.eye(d)
    sigma[0, 2] = sigma[2, 0] = 0.5
    rng = make_rng(7)
    x = mu + rng.standard_normal((900, d)) @ np.linalg.cholesky(sigma).T
    result = joint_mean_cov_estimate(Dataset(x=x), s_mean=1, s_cov=2)

    assert not result.regularized
    np.testing.assert_allclose(result.sigma_hat, result.sigma_hat.T)
    np.testing.assert_allclose(np.diag(result.sigma_hat), 1.0)
    assert result.sigma_hat[0, 2] == pytest.approx(0.5, abs=0.2)
    assert np.linalg.norm(result.mu_hat - mu) < 0.4
    assert np.count_nonzero(result.mean_bundle.theta_hat) <= 2


def test_config_reads_solver_settings():
    config = EstimatorConfig.from_config({'spca': {'tol': 1e-2, 'adapt_factor': 3.0}})
    assert config.spca_tol == 1e-2
    oracle = config.oracle_config(_mean_model(), 0.1, n_points=100)
    assert oracle.spca_tol == 1e-2
    assert oracle.spca_adapt_factor == 3.0
    # Without [spca] tol the tolerance follows eps
    assert EstimatorConfig.from_config({}).oracle_config(_mean_model(), 0.1).spca_tol == pytest.approx(0.01)


def test_c_sep_table_and_single_value():
    mean = _mean_model()
    cov = CovarianceModel(params=CovarianceParams(S_mat=np.zeros((3, 3)), rho=1.0), s=2)

    table = EstimatorConfig.from_config({'oracle': {'c_sep': {'covariance': 0.5}}})
    assert table.c_sep_for(cov) == 0.5
    assert table.c_sep_for(mean) == DEFAULT_CONFIG['oracle']['c_sep']['mean']

    flat = EstimatorConfig.from_config({'oracle': {'c_sep': 2.0}})
    assert flat.c_sep_for(cov) == flat.c_sep_for(mean) == 2.0
    assert EstimatorConfig(c_sep=3.0).c_sep_for(cov) == 3.0


def test_default_threshold_has_a_sampling_term():
    model = _mean_model()
    config = EstimatorConfig()
    with_m = config.oracle_config(model, 0.1, n_points=400).tau_sep
    without_m = config.oracle_config(model, 0.1).tau_sep
    assert without_m == pytest.approx(model.delta(0.1))
    assert with_m - without_m == pytest.approx(config.c_stat * sampling_level(model, 400))
    # Explicit threshold wins
    assert EstimatorConfig(tau_sep=0.7).oracle_config(model, 0.1, n_points=400).tau_sep == 0.7


@pytest.mark.slow
def test_joint_estimate_beats_plug_in_under_contamination():
    d, n = 6, 900
    mu = np.zeros(d)
    mu[1] = 1.5
    rng = make_rng(11)
    x = mu + rng.standard_normal((n, d))
    bad = rng.permutation(n)[:n // 10]
    x[bad] = 5.0 * np.eye(d)[0]
    data = Dataset(x=x, epsilon=0.1)

    result = joint_mean_cov_estimate(data, EstimatorConfig(max_iters=3000), s_mean=1, s_cov=2)
    plug_in = top_k(x.mean(axis=0), 2).values
    assert np.linalg.norm(result.mu_hat - mu) < np.linalg.norm(plug_in - mu)
