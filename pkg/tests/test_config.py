import logging
from pathlib import Path

from robsparse.config import DEFAULT_CONFIG, load_config
from robsparse.estimator import EstimatorConfig
from robsparse.helpers import env_threads, format_duration, make_rng, setup_logger


def test_defaults_without_a_file(tmp_path):
    config = load_config(str(tmp_path / 'missing.toml'))
    assert config == DEFAULT_CONFIG
    assert config is not DEFAULT_CONFIG


def test_file_values_are_overlaid(tmp_path):
    path = tmp_path / 'config.toml'
    path.write_text('[pruning]\nc_prune = 2.5\n\n[extra]\nkey = "value"\n')
    config = load_config(str(path))
    assert config['pruning']['c_prune'] == 2.5
    assert config['pruning']['tau_prune'] == DEFAULT_CONFIG['pruning']['tau_prune']
    assert config['extra'] == {'key': 'value'}
    assert DEFAULT_CONFIG['pruning']['c_prune'] == 4.0


def test_c_sep_table_overlays_the_defaults(tmp_path):
    path = tmp_path / 'config.toml'
    path.write_text('[oracle.c_sep]\ncovariance = 0.5\n')
    config = EstimatorConfig.from_config(load_config(str(path)))
    assert config.c_sep_models['covariance'] == 0.5
    assert config.c_sep_models['mean'] == DEFAULT_CONFIG['oracle']['c_sep']['mean']
    assert config.c_stat == DEFAULT_CONFIG['oracle']['c_stat']


def test_shipped_file_matches_the_defaults():
    config = load_config(str(Path(__file__).parent.parent / 'config.toml'))
    for section in ('pruning', 'oracle', 'spca', 'ellipsoid', 'harness', 'testkit'):
        assert config[section] == DEFAULT_CONFIG[section], section


def test_broken_file_falls_back_to_defaults(tmp_path):
    path = tmp_path / 'config.toml'
    path.write_text('[pruning\n')
    assert load_config(str(path)) == DEFAULT_CONFIG


def test_env_threads(monkeypatch):
    monkeypatch.delenv('ROBSPARSE_THREADS', raising=False)
    assert env_threads(3) == 3
    monkeypatch.setenv('ROBSPARSE_THREADS', '4')
    assert env_threads() == 4
    monkeypatch.setenv('ROBSPARSE_THREADS', 'many')
    assert env_threads(2) == 2


def test_helpers():
    assert format_duration(3725) == '1h:2m:5s'
    assert format_duration(None) == 'N/A'
    assert make_rng(1, 2).random() == make_rng(1, 2).random()
    assert make_rng(1, 2).random() != make_rng(1).random()


def test_setup_logger_does_not_stack_handlers():
    setup_logger('robsparse', level=logging.WARNING)
    setup_logger('robsparse', level=logging.WARNING)
    ours = [h for h in logging.getLogger().handlers if getattr(h, '_robsparse', False)]
    assert len(ours) == 1
