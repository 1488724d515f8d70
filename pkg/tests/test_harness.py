import csv
import json

import numpy as np
import pytest

from robsparse.config import DEFAULT_CONFIG
from robsparse.errors import ConfigurationError
from robsparse.harness import (ResultRecord, RunConfig, baseline_estimators, expand_grid, load_sweep, run_sweep,
                               run_trial, simulate_trial, support_recall, true_parameter)
from robsparse.helpers import make_rng


BASE = {
    "model": "mean", "n": 60, "d": 5, "s": 1, "epsilon": 0.1, "tau_sep": 50.0, "max_iters": 50,
    "trials": 3, "seed": 1,
}


def _rows(path):
    with open(path, newline='') as f:
        return list(csv.DictReader(f))


def test_sweep_writes_one_row_per_grid_point_trial_and_method(tmp_path):
    out = tmp_path / 'results.csv'
    records = run_sweep({"base": BASE, "grid": {"epsilon": [0.0, 0.1]}}, out)
    rows = _rows(out)
    assert len(records) == len(rows) == 12
    assert list(rows[0]) == ResultRecord.header()
    assert [r['method'] for r in rows[:2]] == ['robust', 'naive_threshold']
    assert [r['trial'] for r in rows[:6]] == ['0', '0', '1', '1', '2', '2']
    assert all(r['error'] == '' for r in rows)
    assert all(r['runtime_ms'] == '' for r in rows)
    assert all(r['frob_error'] == '' for r in rows)
    assert rows[0]['terminated_by'] == 'OracleYes'


def test_sweep_is_reproducible_across_thread_counts(tmp_path):
    sweep = {"base": BASE, "grid": {"q_family": ["point_mass", "variance_inflation"]}}
    first, second, third = tmp_path / 'a.csv', tmp_path / 'b.csv', tmp_path / 'c.csv'
    run_sweep(sweep, first, threads=1)
    run_sweep(sweep, second, threads=1)
    run_sweep(sweep, third, threads=2)
    assert first.read_bytes() == second.read_bytes() == third.read_bytes()


def test_empty_methods_write_only_the_header(tmp_path):
    out = tmp_path / 'results.csv'
    assert run_sweep({"base": dict(BASE, methods=[])}, out) == []
    assert out.read_text().splitlines() == [','.join(ResultRecord.header())]


def test_failed_runs_become_error_rows(tmp_path):
    config = RunConfig.from_dict(dict(BASE, q_family='response_flip', epsilon=0.2))
    records = run_trial(config, 0)
    assert [r.method for r in records] == ['robust', 'naive_threshold']
    assert all(r.error.startswith('InputError') for r in records)
    assert np.isnan(records[0].l2_error)
    assert records[0].row()[ResultRecord.header().index('l2_error')] == 'nan'


def test_covariance_rows_report_frobenius_error():
    config = RunConfig(model='covariance', n=100, d=4, s=2, signal=0.5, tau_sep=100.0, max_iters=20,
                       methods=['naive_threshold', 'prune_only'])
    records = run_trial(config, 0)
    assert all(r.frob_error is not None for r in records)
    # The estimate and the truth are symmetric, so both norms agree
    assert records[0].frob_error == pytest.approx(records[0].l2_error)


def test_record_runtime():
    config = RunConfig.from_dict(dict(BASE, record_runtime=True, methods=['naive_threshold']))
    assert run_trial(config, 0)[0].runtime_ms >= 0

    # The package-wide switch turns it on for every run
    package_config = dict(DEFAULT_CONFIG, harness=dict(DEFAULT_CONFIG['harness'], record_runtime=True))
    plain = RunConfig.from_dict(dict(BASE, methods=['naive_threshold']))
    assert run_trial(plain, 0, package_config)[0].runtime_ms >= 0
    assert run_trial(plain, 0)[0].runtime_ms is None


def test_unexpected_failures_become_error_rows(monkeypatch):
    def broken(*args, **kwargs):
        raise RuntimeError("solver blew up")

    monkeypatch.setattr('robsparse.harness.estimate_functional', broken)
    records = run_trial(RunConfig.from_dict(BASE), 0)
    assert records[0].error == 'RuntimeError: solver blew up'
    # The remaining methods still run
    assert records[1].method == 'naive_threshold'
    assert records[1].error == ''


def test_trial_data_is_shared_and_seeded():
    config = RunConfig.from_dict(BASE)
    model, data = simulate_trial(config, 2)
    model_again, data_again = simulate_trial(config, 2)
    np.testing.assert_array_equal(model.functional(), model_again.functional())
    np.testing.assert_array_equal(data.x, data_again.x)
    assert data.seed == config.trial_seed(2) == 10002


def test_true_parameter_shapes():
    theta = true_parameter(RunConfig(d=8, s=3, signal=2.0), make_rng(0))
    assert np.count_nonzero(theta) == 3
    assert np.linalg.norm(theta) == pytest.approx(2.0)

    S = true_parameter(RunConfig(model='covariance', d=6, s=4, signal=0.5), make_rng(0))
    np.testing.assert_array_equal(S, S.T)
    assert np.count_nonzero(S) == 4
    assert np.all(np.diag(S) == 0)


def test_baselines():
    config = RunConfig.from_dict(BASE)
    model, data = simulate_trial(config, 0)
    estimates = baseline_estimators(data, model, 1)
    assert set(estimates) == {'naive_threshold', 'prune_only', 'oracle_weights'}
    assert all(np.count_nonzero(v) <= 2 for v in estimates.values())

    data.labels = None
    with pytest.raises(ConfigurationError):
        baseline_estimators(data, model, 1, methods=('oracle_weights',))
    with pytest.raises(ConfigurationError):
        baseline_estimators(data, model, 1, methods=('median',))


def test_support_recall():
    assert support_recall(np.array([1.0, 0, 2.0]), np.array([3.0, 1.0, 0])) == 0.5
    assert support_recall(np.ones(3), np.zeros(3)) == 1.0


def test_configuration_is_validated(tmp_path):
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict(dict(BASE, bogus=1))
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict(dict(BASE, epsilon=0.5))
    with pytest.raises(ConfigurationError):
        RunConfig(model='covariance', d=4, s=2, signal=2.0)
    with pytest.raises(ConfigurationError):
        RunConfig(model='logistic', link='tanh')
    with pytest.raises(ConfigurationError):
        expand_grid({"grid": {"n": [10]}})
    with pytest.raises(ConfigurationError):
        expand_grid({"base": BASE, "grid": {"colour": ["red"]}})
    with pytest.raises(ConfigurationError):
        run_sweep({"base": BASE}, tmp_path / 'missing' / 'out.csv')


def test_load_sweep_wraps_a_bare_config(tmp_path):
    path = tmp_path / 'sweep.json'
    path.write_text(json.dumps(BASE))
    assert load_sweep(path) == {"base": BASE}
    assert len(expand_grid(load_sweep(path))) == 1
    with pytest.raises(ConfigurationError):
        load_sweep(tmp_path / 'nothing.json')
