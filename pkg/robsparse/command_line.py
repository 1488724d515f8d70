#!/usr/bin/env python3
"""
Command line front end.

Subcommands
-----------
- simulate: draw a contaminated dataset and write it as CSV.
- estimate: one robust estimate, printed as a JSON summary.
- sweep: a parameter sweep from a JSON document, written as CSV.
- verify: run a testkit suite and print its checks.

Run `robsparse <command> --help` for the flags of each command.
"""
import sys
import json
import logging
from collections import defaultdict

import argh
import numpy as np
from tabulate import tabulate

from .config import load_config
from .dataset import export_to_csv, load_from_csv
from .errors import RobsparseError
from .estimator import EstimatorConfig, estimate_functional
from .harness import RunConfig, load_sweep, run_sweep, simulate_trial
from .helpers import env_threads, setup_logger
from .links import available_links
from .models import ModelId
from .simulator import available_contaminations
from .testkit import available_suites, verify as run_verify


MODELS = [m.value for m in ModelId]
FAMILIES = sorted(available_contaminations)
LINKS = sorted(available_links)


def cli_print(message, level="info"):
    """
    Prints messages with standardized formatting.

    level can be: "info", "warning", "error", "success"
    """
    colors = {
        "info": "\033[94m[INFO]\033[0m",  # Blue
        "warning": "\033[93m[WARNING]\033[0m",  # Yellow
        "error": "\033[91m[ERROR]\033[0m",  # Red
        "success": "\033[92m[SUCCESS]\033[0m",  # Green
    }
    stream = sys.stderr if level in ("warning", "error") else sys.stdout
    print(f"{colors.get(level, '[INFO]')} {message}", file=stream)


def _setup(config_file, verbose):
    config = load_config(config_file)
    setup_logger("robsparse", level=logging.DEBUG if verbose else logging.WARNING,
                 fname=config['files'].get('logger_fname'))
    return config


def _run_config(model, n, d, s, epsilon, family, magnitude, signal, link, seed):
    return RunConfig(model=model, n=n, d=d, s=s, epsilon=epsilon, q_family=family,
                     q_magnitude=magnitude, signal=signal, link=link, seed=seed)


_common = [
    argh.arg('--model', choices=MODELS, help='statistical model'),
    argh.arg('--n', type=int, help='number of samples'),
    argh.arg('--d', type=int, help='dimension'),
    argh.arg('--s', type=int, help='sparsity of the functional'),
    argh.arg('--epsilon', type=float, help='contamination fraction in [0, 1/2)'),
    argh.arg('--family', choices=FAMILIES, help='contamination family'),
    argh.arg('--magnitude', type=float, help='main parameter of the contamination family'),
    argh.arg('--signal', type=float, help='l2 norm of the true parameter'),
    argh.arg('--link', choices=LINKS, help='link of GLM/logistic models'),
    argh.arg('--seed', type=int, help='seed of the true parameter and of the data'),
]


def _with_common(func):
    for decorator in reversed(_common):
        func = decorator(func)
    return func


@_with_common
@argh.arg('--out', help='output CSV file')
@argh.arg('--with-labels', help='append the hidden Good/Bad label column')
def simulate(*, model='mean', n=200, d=10, s=2, epsilon=0.1, family='point_mass', magnitude=None,
             signal=1.0, link=None, seed=0, out='dataset.csv', with_labels=False,
             config_file='config.toml', verbose=False):
    """Draw an epsilon-contaminated dataset and write it as CSV."""
    _setup(config_file, verbose)
    try:
        run = _run_config(model, n, d, s, epsilon, family, magnitude, signal, link, seed)
        _, dataset = simulate_trial(run, 0)
        export_to_csv(dataset, out, with_labels=with_labels)
    except (RobsparseError, OSError) as e:
        cli_print(f"simulate failed: {e}", level='error')
        sys.exit(1)
    bad = int(np.count_nonzero(~dataset.labels))
    cli_print(f"wrote {dataset.n} samples ({bad} from Q) to {out}", level='success')


@_with_common
@argh.arg('--data', help='CSV file from `simulate`; the same model flags rebuild the true parameter')
@argh.arg('--tau-sep', type=float, help='acceptance threshold override')
@argh.arg('--max-iters', type=int, help='ellipsoid iteration cap')
def estimate(*, model='mean', n=200, d=10, s=2, epsilon=0.1, family='point_mass', magnitude=None,
             signal=1.0, link=None, seed=0, data=None, tau_sep=None, max_iters=None,
             config_file='config.toml', verbose=False):
    """
    Run the robust estimator once and print a JSON summary.

    Without --data the dataset is simulated from the same flags.
    """
    config = _setup(config_file, verbose)
    try:
        run = _run_config(model, n, d, s, epsilon, family, magnitude, signal, link, seed)
        adapter, dataset = simulate_trial(run, 0)
        if data is not None:
            dataset = load_from_csv(data, epsilon=epsilon, seed=seed)
        bundle = estimate_functional(dataset, adapter,
                                     EstimatorConfig.from_config(config, tau_sep=tau_sep, max_iters=max_iters))
    except (RobsparseError, OSError) as e:
        cli_print(f"estimate failed: {e}", level='error')
        sys.exit(1)

    summary = bundle.summary()
    summary['l2_error'] = float(np.linalg.norm(bundle.theta_hat - adapter.functional()))
    print(json.dumps(summary, indent=2))


@argh.arg('--config', help='sweep JSON: {"base": RunConfig, "grid": {field: [values]}}')
@argh.arg('--out', help='output CSV file')
@argh.arg('--threads', type=int, help='worker threads (default: ROBSPARSE_THREADS or config.toml)')
def sweep(*, config=None, out='results.csv', threads=None, config_file='config.toml', verbose=False):
    """Run a parameter sweep and write one CSV row per (grid point, trial, method)."""
    package_config = _setup(config_file, verbose)
    if config is None:
        cli_print("a sweep needs --config PATH", level='error')
        sys.exit(2)
    if threads is None:
        threads = env_threads(package_config['harness']['threads'])
    try:
        records = run_sweep(load_sweep(config), out, threads=threads, package_config=package_config)
    except RobsparseError as e:
        cli_print(f"sweep failed: {e}", level='error')
        sys.exit(1)

    errors = defaultdict(list)
    for record in records:
        if not record.error:
            errors[(record.model, record.epsilon, record.method)].append(record.l2_error)
    table = [(*key, len(values), float(np.median(values))) for key, values in errors.items()]
    if table:
        print(tabulate(table, headers=["Model", "Epsilon", "Method", "Runs", "Median l2 error"], tablefmt="github"))
    failed = sum(1 for r in records if r.error)
    cli_print(f"wrote {len(records)} rows to {out}", level='warning' if failed else 'success')
    if failed:
        cli_print(f"{failed} runs failed; see the error column", level='warning')


@argh.arg('--suite', choices=sorted(available_suites), help='property suite to run')
@argh.arg('--seed', type=int, help='seed of the suite')
@argh.arg('--json-output', help='print the checks as JSON')
def verify(*, suite=None, seed=0, json_output=False, config_file='config.toml', verbose=False):
    """Run a testkit suite; exits with status 1 if any check fails."""
    config = _setup(config_file, verbose)
    if suite is None:
        cli_print(f"choose a suite with --suite {{{','.join(sorted(available_suites))}}}", level='error')
        sys.exit(2)
    results = run_verify(suite, config, seed=seed)
    if json_output:
        print(json.dumps([r.as_dict() for r in results], indent=2))
    else:
        rows = [(r.name, f"{r.measured:.4g}", f"{r.threshold:.4g}", "pass" if r.passed else "FAIL") for r in results]
        print(tabulate(rows, headers=["Check", "Measured", "Threshold", "Result"], tablefmt="github"))
    if not all(r.passed for r in results):
        cli_print(f"suite '{suite}' failed", level='error')
        sys.exit(1)
    cli_print(f"suite '{suite}' passed", level='success')


def main():
    argh.dispatch_commands([simulate, estimate, sweep, verify])


if __name__ == '__main__':
    main()
