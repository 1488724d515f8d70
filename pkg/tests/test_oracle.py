import math

import numpy as np
import pytest

from robsparse.errors import InputError
from robsparse.models import MeanModel, MeanParams
from robsparse.oracle import (OracleConfig, SeparationOracle, VerdictKind, evaluate_oracle, sampling_level,
                              weighted_deviation_matrix)
from robsparse.simulator import ContaminationSpec, PointMass, sample_contaminated


@pytest.fixture
def model():
    return MeanModel(params=MeanParams(mu=[0.0, 1.0, 0.0, 0.0, 0.0]), s=1)


def _uniform(m):
    return np.full(m, 1.0 / m)


def test_clean_uniform_weights_are_accepted(model):
    points = model.g_batch(model.sample_clean(2000, seed=0))
    verdict = evaluate_oracle(_uniform(2000), points, model, OracleConfig(tau_sep=1.0, s=1))
    assert verdict.kind is VerdictKind.YES
    assert not verdict.is_cut
    assert verdict.lambda_star <= 1.0
    assert np.count_nonzero(verdict.theta_hat) <= 2
    with pytest.raises(InputError):
        verdict.hyperplane(_uniform(2000))


def test_contaminated_weights_are_cut(model):
    data = sample_contaminated(model, 500, ContaminationSpec(0.1, PointMass(magnitude=10.0), seed=3))
    points = model.g_batch(data)
    w = _uniform(data.n)
    verdict = evaluate_oracle(w, points, model, OracleConfig(tau_sep=1.0, s=1))
    assert verdict.is_cut
    assert verdict.lambda_star > 5.0
    # The hyperplane passes through the query point
    assert verdict.hyperplane(w) == pytest.approx(0.0, abs=1e-8)
    # ... and separates it from the uniform weights on the inliers
    w_good = data.labels / data.labels.sum()
    assert verdict.hyperplane(w_good) < 0
    # Outliers are charged more than inliers
    assert verdict.a[~data.labels].min() > verdict.a[data.labels].mean()


def test_deviation_matrix_subtracts_the_model_covariance(model):
    points = np.array([[1.0, 0, 0, 0, 0], [-1.0, 0, 0, 0, 0]])
    E = weighted_deviation_matrix([0.5, 0.5], points, model, np.zeros(5))
    np.testing.assert_allclose(E, np.diag([0.0, -1, -1, -1, -1]))
    with pytest.raises(InputError):
        weighted_deviation_matrix([1.0], points, model, np.zeros(5))


def test_config(model):
    with pytest.raises(InputError):
        OracleConfig(tau_sep=0.0, s=1)
    with pytest.raises(InputError):
        OracleConfig(tau_sep=1.0, s=0)

    clean = OracleConfig.for_model(model, 0.0)
    assert clean.tau_sep > 0
    assert clean.s == 1
    contaminated = OracleConfig.for_model(model, 0.1, c_sep=2.0)
    assert contaminated.tau_sep == pytest.approx(2.0 * model.delta(0.1))
    assert OracleConfig.for_model(model, 0.1, tau_sep=3.0).tau_sep == 3.0


def test_oracle_counts_calls(model):
    points = model.g_batch(model.sample_clean(100, seed=1))
    oracle = SeparationOracle(points, model, OracleConfig(tau_sep=5.0, s=1))
    oracle(_uniform(100))
    oracle(_uniform(100))
    assert oracle.calls == 2
    assert oracle.unconverged == 0


def test_sampling_level(model):
    assert sampling_level(model, 100) == pytest.approx(math.sqrt(math.log(10) / 100))
    assert sampling_level(model, 400) == pytest.approx(sampling_level(model, 100) / 2)
    with pytest.raises(InputError):
        sampling_level(model, 0)

    with_m = OracleConfig.for_model(model, 0.1, n_points=100, c_stat=2.0)
    assert with_m.tau_sep == pytest.approx(model.delta(0.1) + 2.0 * sampling_level(model, 100))
    # The threshold never drops below twice the solver tolerance
    assert OracleConfig.for_model(model, 0.0, spca_tol=0.05).tau_sep == pytest.approx(0.1)


def test_verdict_is_monotone_in_the_threshold(model):
    data = sample_contaminated(model, 300, ContaminationSpec(0.1, PointMass(magnitude=10.0), seed=5))
    points = model.g_batch(data)
    w = _uniform(data.n)
    lam = evaluate_oracle(w, points, model, OracleConfig(tau_sep=1e6, s=1)).lambda_star
    assert lam > 1.0

    verdicts = {factor: evaluate_oracle(w, points, model, OracleConfig(tau_sep=factor * lam, s=1))
                for factor in (0.25, 0.5, 2.0, 4.0)}
    assert [verdicts[f].is_cut for f in (0.25, 0.5, 2.0, 4.0)] == [True, True, False, False]
    for verdict in verdicts.values():
        assert verdict.lambda_star == pytest.approx(lam)


def test_rank_one_cut_is_a_squared_projection(model):
    data = sample_contaminated(model, 300, ContaminationSpec(0.1, PointMass(magnitude=10.0), seed=6))
    points = model.g_batch(data)
    verdict = evaluate_oracle(_uniform(data.n), points, model, OracleConfig(tau_sep=1.0, s=1))
    assert verdict.is_cut

    eigvals, eigvecs = np.linalg.eigh(verdict.H_star)
    top, v = eigvals[-1], eigvecs[:, -1]
    # With s = 1 the relaxation picks a single coordinate: the outlier direction
    assert top > 0.99
    assert abs(v[0]) > 0.99

    dev = points - verdict.theta_hat
    rest = np.abs(eigvals[:-1]).sum()
    gap = np.abs(verdict.a - top * (dev @ v) ** 2)
    assert np.all(gap <= rest * np.sum(dev ** 2, axis=1) + 1e-9)
    np.testing.assert_allclose(verdict.a, (dev @ v) ** 2, rtol=0.02, atol=0.02 * np.max(verdict.a))


def test_yes_verdict_carries_no_relaxation_matrix(model):
    points = model.g_batch(model.sample_clean(500, seed=2))
    verdict = evaluate_oracle(_uniform(500), points, model, OracleConfig(tau_sep=5.0, s=1))
    assert verdict.H_star is None
