import math

import numpy as np
import pytest

from robsparse.dataset import Dataset
from robsparse.errors import EstimationError, InputError
from robsparse.models import CovarianceModel, CovarianceParams, MeanModel, MeanParams, RegressionModel, RegressionParams
from robsparse.pruning import prune, pruning_radius


def _mean_model(d=5):
    mu = np.zeros(d)
    mu[0] = 1.0
    return MeanModel(params=MeanParams(mu=mu), s=1)


def test_clean_samples_survive():
    model = _mean_model()
    data = model.sample_clean(500, seed=0)
    data.epsilon = 0.05
    pruned, with_radius = prune(model, data)
    assert pruned.n == data.n
    assert math.isfinite(with_radius.radius_D)
    assert math.isinf(model.radius_D)


def test_gross_outliers_are_removed():
    model = _mean_model()
    clean = model.sample_clean(190, seed=1)
    x = np.vstack([clean.x, np.tile(1000.0 * np.eye(5)[0], (10, 1))])
    labels = np.r_[np.ones(190, dtype=bool), np.zeros(10, dtype=bool)]
    data = Dataset(x=x, labels=labels, epsilon=0.05)
    pruned, _ = prune(model, data)
    assert pruned.n == 190
    assert np.all(pruned.labels)
    # Survivors keep their original positions
    np.testing.assert_array_equal(pruned.indices, np.arange(190))


def test_regression_prunes_large_responses():
    model = RegressionModel(params=RegressionParams(beta=[1.0, 0.0, 0.0]), s=1)
    data = model.sample_clean(100, seed=2)
    data.y[:3] = 1e6
    data.epsilon = 0.05
    pruned, _ = prune(model, data)
    np.testing.assert_array_equal(pruned.indices, np.arange(3, 100))


def test_removing_everything_is_an_error():
    S = np.zeros((3, 3))
    S[0, 1] = S[1, 0] = 0.2
    model = CovarianceModel(params=CovarianceParams(S_mat=S), s=2)
    data = Dataset(x=np.full((20, 3), 1e6), epsilon=0.1)
    with pytest.raises(EstimationError):
        prune(model, data)


def test_invalid_input():
    model = _mean_model()
    with pytest.raises(InputError):
        prune(model, Dataset(x=np.zeros((0, 5))))
    with pytest.raises(InputError):
        prune(model, model.sample_clean(10, seed=0), tau_prune=1.5)


def test_pruning_radius_grows_with_n():
    model = _mean_model()
    assert pruning_radius(model, 100, 0.01, 4.0) < pruning_radius(model, 10000, 0.01, 4.0)
    assert pruning_radius(model, 100, 0.01, 4.0) == pytest.approx(4.0 * math.sqrt(5 * math.log(100 / 0.01)))


@pytest.mark.parametrize("model", [
    _mean_model(10),
    CovarianceModel(params=CovarianceParams(S_mat=np.array([[0, 0.3, 0], [0.3, 0, 0], [0, 0, 0]])), s=2),
    RegressionModel(params=RegressionParams(beta=[1.0, 0.0, 0.0, 0.0]), s=1),
], ids=['mean', 'covariance', 'regression'])
def test_clean_samples_survive_across_seeds(model):
    removed = 0
    for seed in range(100):
        data = model.sample_clean(200, seed=seed)
        data.epsilon = 0.1
        pruned, _ = prune(model, data, tau_prune=0.01)
        removed += pruned.n < data.n
    assert removed <= 1
