"""
This module runs seeded experiments: it draws a true sparse parameter
and a contaminated dataset per trial, applies the robust estimator and
the baselines, and writes one CSV row per (grid point, trial, method).

Classes
-------
- RunConfig: one fully specified experiment, validated against
  `RUN_CONFIG_SCHEMA`.
- ResultRecord: one CSV row.

Functions
---------
- simulate_trial: true model and dataset of one trial.
- baseline_estimators: naive_threshold, prune_only and oracle_weights.
- run_trial: every method of one trial on a shared dataset.
- expand_grid: sweep document -> list of RunConfig.
- run_sweep: the full sweep, written to CSV.

Notes
-----
- Loop order is grid point (outer), trial, method (inner). Each trial
  draws its dataset once and every method sees the same data.
- Rows are buffered and written in loop order whatever the completion
  order of parallel trials, so a sweep is byte-reproducible (the
  runtime column is left empty unless `record_runtime` is set).
- A failing run becomes a row with the `error` column filled; the
  sweep continues.
"""
import csv
import json
import math
import time
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional

import numpy as np
from jsonschema import validate, ValidationError

from .config import DEFAULT_CONFIG
from .errors import ConfigurationError, EstimationError
from .estimator import EstimatorConfig, estimate_functional
from .helpers import format_duration, make_rng
from .links import available_links
from .models import (CovarianceParams, GlmParams, MeanParams, ModelId, RegressionParams,
                     get_model_class)
from .pruning import prune
from .simulator import ContaminationSpec, available_contaminations, make_family, sample_contaminated
from .thresholding import top_k


METHODS = ('robust', 'naive_threshold', 'prune_only', 'oracle_weights')
BASELINES = METHODS[1:]

_optional_positive = {"type": ["number", "null"], "exclusiveMinimum": 0}
_optional_count = {"type": ["integer", "null"], "minimum": 1}

# Validation schema
RUN_CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "model": {"enum": [m.value for m in ModelId]},
        "n": {"type": "integer", "minimum": 1},
        "d": {"type": "integer", "minimum": 1},
        "s": {"type": "integer", "minimum": 1},
        "epsilon": {"type": "number", "minimum": 0, "exclusiveMaximum": 0.5},
        "tau": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "tau_prune": {"type": ["number", "null"], "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "tau_sep": _optional_positive,
        "q_family": {"enum": sorted(available_contaminations)},
        "q_magnitude": {"type": ["number", "null"]},
        "c_sep": _optional_positive,
        "c_stat": {"type": ["number", "null"], "minimum": 0},
        "c_prune": _optional_positive,
        "spca_tol": _optional_positive,
        "spca_max_iters": _optional_count,
        "max_iters": _optional_count,
        "volume_floor": {"type": ["number", "null"], "minimum": 0},
        "signal": {"type": "number", "minimum": 0},
        "link": {"enum": sorted(available_links) + [None]},
        "seed": {"type": "integer", "minimum": 0},
        "trials": {"type": "integer", "minimum": 1},
        "methods": {"type": "array", "items": {"enum": list(METHODS)}, "uniqueItems": True},
        "record_runtime": {"type": "boolean"},
    },
    "additionalProperties": False,
}

SWEEP_SCHEMA = {
    "type": "object",
    "properties": {
        "base": {"type": "object"},
        "grid": {
            "type": "object",
            "propertyNames": {"enum": sorted(RUN_CONFIG_SCHEMA["properties"])},
            "additionalProperties": {"type": "array", "minItems": 1},
        },
    },
    "required": ["base"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class RunConfig:
    """
    One experiment. Fields left None fall back to the package configuration.

    Attributes:
        model (str): Model id.
        n, d, s (int): Sample size, dimension and sparsity. For the
            covariance model s counts nonzero entries of S (both triangles).
        epsilon (float): Contamination fraction.
        tau (float): Overall failure probability; default for tau_prune.
        tau_prune (float, optional): Pruning failure probability.
        tau_sep (float, optional): Explicit acceptance threshold.
        q_family (str): Contamination family name.
        q_magnitude (float, optional): Main parameter of the family.
        c_sep, c_stat, c_prune (float, optional): Threshold constants.
        spca_tol (float, optional), spca_max_iters (int, optional): Relaxation settings.
        max_iters (int, optional), volume_floor (float, optional): Ellipsoid caps.
        signal (float): l2 norm of the true parameter.
        link (str, optional): Link for GLM/logistic models.
        seed (int): Base seed; trial t uses seed * 10000 + t.
        trials (int): Trials per grid point.
        methods (list[str]): Methods to run.
        record_runtime (bool): Fill the runtime_ms column; `[harness] record_runtime`
            in the package configuration turns it on for every run.
    """
    model: str = 'mean'
    n: int = 200
    d: int = 10
    s: int = 2
    epsilon: float = 0.1
    tau: float = 0.01
    tau_prune: Optional[float] = None
    tau_sep: Optional[float] = None
    q_family: str = 'point_mass'
    q_magnitude: Optional[float] = None
    c_sep: Optional[float] = None
    c_stat: Optional[float] = None
    c_prune: Optional[float] = None
    spca_tol: Optional[float] = None
    spca_max_iters: Optional[int] = None
    max_iters: Optional[int] = None
    volume_floor: Optional[float] = None
    signal: float = 1.0
    link: Optional[str] = None
    seed: int = 0
    trials: int = 1
    methods: List[str] = field(default_factory=lambda: ['robust', 'naive_threshold'])
    record_runtime: bool = False

    def __post_init__(self):
        try:
            model_id = ModelId(self.model)
        except ValueError:
            raise ConfigurationError(f"unknown model '{self.model}'") from None
        d_g = self.d ** 2 if model_id is ModelId.COVARIANCE else self.d
        if self.s > d_g:
            raise ConfigurationError(f"s = {self.s} exceeds the functional dimension {d_g}")
        if model_id is ModelId.COVARIANCE:
            if self.d < 2 or self.s < 2:
                raise ConfigurationError("covariance runs need d >= 2 and s >= 2")
            if (self.s // 2) > self.d // 2:
                raise ConfigurationError(f"cannot place {self.s // 2} disjoint pairs in dimension {self.d}")
            if self.signal / math.sqrt(self.s) >= 1:
                raise ConfigurationError("covariance signal too large: I + S would not be positive definite")
        if model_id is ModelId.LOGISTIC and self.link is not None and not available_links[self.link].probability:
            raise ConfigurationError(f"link '{self.link}' does not map into [0, 1]")

    @classmethod
    def from_dict(cls, data):
        """
        Validate a plain dictionary and build a RunConfig.

        Raises:
            ConfigurationError: On unknown fields, wrong types or
                inconsistent values.
        """
        try:
            validate(instance=data, schema=RUN_CONFIG_SCHEMA)
        except ValidationError as e:
            raise ConfigurationError(f"invalid run configuration: {e.message}") from None
        return cls(**data)

    def to_dict(self):
        return asdict(self)

    @property
    def model_id(self):
        return ModelId(self.model)

    def trial_seed(self, trial):
        return self.seed * 10000 + trial

    def estimator_config(self, config=None):
        """EstimatorConfig from the package configuration with this run's overrides."""
        return EstimatorConfig.from_config(
            config or DEFAULT_CONFIG,
            c_prune=self.c_prune,
            tau_prune=self.tau_prune if self.tau_prune is not None else self.tau,
            c_sep=self.c_sep,
            c_stat=self.c_stat,
            tau_sep=self.tau_sep,
            spca_tol=self.spca_tol,
            spca_max_iters=self.spca_max_iters,
            max_iters=self.max_iters,
            volume_floor=self.volume_floor,
        )


@dataclass(frozen=True)
class ResultRecord:
    """One CSV row. Metrics are NaN and `error` is set when the run failed."""
    model: str
    trial: int
    method: str
    n: int
    d: int
    s: int
    epsilon: float
    l2_error: float = math.nan
    frob_error: Optional[float] = None
    support_recall: float = math.nan
    lambda_best: Optional[float] = None
    oracle_calls: Optional[int] = None
    runtime_ms: Optional[float] = None
    terminated_by: str = ''
    error: str = ''

    @classmethod
    def header(cls):
        return [f.name for f in fields(cls)]

    def row(self):
        out = []
        for name in self.header():
            value = getattr(self, name)
            if value is None:
                out.append('')
            elif isinstance(value, float):
                out.append(f'{value:.12g}')
            else:
                out.append(str(value))
        return out


# True parameters
def true_parameter(config, rng):
    """
    Draw the true parameter of a trial.

    Vectors get s random coordinates of size signal/sqrt(s) with random
    signs. The covariance model gets s//2 disjoint symmetric pairs (i, j)
    with S_ij = S_ji = +-signal/sqrt(s), which keeps I + S positive definite.
    """
    d, s = config.d, config.s
    magnitude = config.signal / math.sqrt(s)
    if config.model_id is ModelId.COVARIANCE:
        pairs = s // 2
        order = rng.permutation(d)[:2 * pairs]
        S = np.zeros((d, d))
        for k in range(pairs):
            i, j = order[2 * k], order[2 * k + 1]
            S[i, j] = S[j, i] = magnitude * rng.choice([-1.0, 1.0])
        return S
    theta = np.zeros(d)
    support = rng.choice(d, size=s, replace=False)
    theta[support] = magnitude * rng.choice([-1.0, 1.0], size=s)
    return theta


def build_model(config, theta):
    """Adapter for `config.model` with true parameter `theta`."""
    model_id = config.model_id
    model_class = get_model_class(model_id)
    if model_id is ModelId.MEAN:
        params = MeanParams(mu=theta)
    elif model_id is ModelId.COVARIANCE:
        params = CovarianceParams(S_mat=theta)
    elif model_id is ModelId.REGRESSION:
        params = RegressionParams(beta=theta)
    else:
        default_link = 'sigmoid' if model_id is ModelId.LOGISTIC else 'identity'
        params = GlmParams(beta=theta, link=config.link or default_link)
    return model_class(params=params, s=config.s)


def simulate_trial(config, trial):
    """
    True model and contaminated dataset of trial `trial`.

    Returns:
        tuple[ModelAdapter, Dataset]
    """
    seed = config.trial_seed(trial)
    model = build_model(config, true_parameter(config, make_rng(seed, 3)))
    spec = ContaminationSpec(epsilon=config.epsilon,
                             q_family=make_family(config.q_family, config.q_magnitude), seed=seed)
    return model, sample_contaminated(model, config.n, spec)


# Baselines
def _uniform_functional(model, dataset, s):
    return top_k(model.g_batch(dataset).mean(axis=0), 2 * s).values


def baseline_estimators(dataset, model, s, methods=BASELINES, c_prune=4.0, tau_prune=0.01):
    """
    Non-robust reference estimates.

    - naive_threshold: P_2s of the empirical functional.
    - prune_only: the same after naive pruning.
    - oracle_weights: P_2s of the functional weighted uniformly over the
      Good samples (needs hidden labels).

    Returns:
        dict: method name -> theta_hat.

    Raises:
        ConfigurationError: oracle_weights requested without labels, or
            an unknown method.
    """
    estimates = {}
    for method in methods:
        if method == 'naive_threshold':
            estimates[method] = _uniform_functional(model, dataset, s)
        elif method == 'prune_only':
            pruned, pruned_model = prune(model, dataset, tau_prune=tau_prune, c_prune=c_prune)
            estimates[method] = _uniform_functional(pruned_model, pruned, s)
        elif method == 'oracle_weights':
            if not dataset.has_labels:
                raise ConfigurationError("oracle_weights needs a dataset with hidden labels")
            if not np.any(dataset.labels):
                raise EstimationError("no Good samples to weight")
            estimates[method] = _uniform_functional(model, dataset.subset(dataset.labels), s)
        else:
            raise ConfigurationError(f"unknown baseline '{method}'")
    return estimates


def support_recall(theta_hat, theta):
    """|supp(theta_hat) & supp(theta)| / |supp(theta)|, 1 for a zero theta."""
    true_support = set(np.flatnonzero(theta).tolist())
    if not true_support:
        return 1.0
    found = set(np.flatnonzero(theta_hat).tolist())
    return len(found & true_support) / len(true_support)


def _metrics(model, theta_hat, theta):
    l2 = float(np.linalg.norm(theta_hat - theta))
    frob = None
    if model.model_id is ModelId.COVARIANCE:
        frob = float(np.linalg.norm(model.to_matrix(theta_hat) - model.params.S_mat))
    return dict(l2_error=l2, frob_error=frob, support_recall=support_recall(theta_hat, theta))


def run_trial(config, trial, package_config=None):
    """
    All methods of one trial on one shared dataset.

    Returns:
        list[ResultRecord]: In `config.methods` order.
    """
    logger = logging.getLogger("Harness")
    base = dict(model=config.model, trial=trial, n=config.n, d=config.d, s=config.s, epsilon=config.epsilon)
    if not config.methods:
        return []

    try:
        model, dataset = simulate_trial(config, trial)
    except Exception as e:
        logger.exception(f"trial {trial}: could not set up the run")
        return [ResultRecord(method=method, error=f"{type(e).__name__}: {e}", **base) for method in config.methods]

    package_config = package_config or DEFAULT_CONFIG
    record_runtime = config.record_runtime or bool(package_config.get('harness', {}).get('record_runtime', False))
    theta = model.functional()
    records = []
    for method in config.methods:
        start = time.perf_counter()
        try:
            estimator_config = config.estimator_config(package_config)
            if method == 'robust':
                bundle = estimate_functional(dataset, model, estimator_config)
                extra = dict(lambda_best=bundle.best_lambda, oracle_calls=bundle.oracle_calls,
                             terminated_by=bundle.terminated_by.value)
                theta_hat = bundle.theta_hat
            else:
                theta_hat = baseline_estimators(dataset, model, config.s, methods=(method,),
                                                c_prune=estimator_config.c_prune,
                                                tau_prune=estimator_config.tau_prune)[method]
                extra = {}
            runtime = 1000 * (time.perf_counter() - start) if record_runtime else None
            records.append(ResultRecord(method=method, runtime_ms=runtime,
                                        **_metrics(model, theta_hat, theta), **extra, **base))
        except Exception as e:
            # Any failure becomes a row; the sweep goes on
            logger.exception(f"trial {trial}, method {method} failed")
            records.append(ResultRecord(method=method, error=f"{type(e).__name__}: {e}", **base))
    return records


# Sweeps
def expand_grid(sweep):
    """
    Expand {"base": {...}, "grid": {field: [values]}} into RunConfigs.

    Grid points are the cartesian product of the value lists, in key order.

    Raises:
        ConfigurationError: If the document or any grid point is invalid.
    """
    try:
        validate(instance=sweep, schema=SWEEP_SCHEMA)
    except ValidationError as e:
        raise ConfigurationError(f"invalid sweep document: {e.message}") from None

    base = sweep["base"]
    grid = sweep.get("grid", {})
    keys = list(grid)
    configs = []
    for values in itertools.product(*(grid[k] for k in keys)):
        point = dict(base)
        point.update(zip(keys, values))
        configs.append(RunConfig.from_dict(point))
    return configs


def load_sweep(path):
    """Read a sweep JSON document; a bare RunConfig is a one-point sweep."""
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"cannot read sweep file {path}: {e}") from None
    if isinstance(data, dict) and "base" not in data:
        data = {"base": data}
    return data


def run_sweep(sweep, out_path, threads=1, package_config=None):
    """
    Run a sweep and write its CSV.

    Args:
        sweep (dict): Sweep document (see `expand_grid`).
        out_path (str): CSV destination; opened before any run starts.
        threads (int): Worker threads across (grid point, trial) pairs.
        package_config (dict, optional): `load_config` output.

    Returns:
        list[ResultRecord]: The rows, in file order.

    Raises:
        ConfigurationError: Invalid sweep or unwritable output path.
    """
    logger = logging.getLogger("Harness")
    logger.info("-----Harness-----")
    configs = expand_grid(sweep)
    tasks = [(g, t) for g, config in enumerate(configs) for t in range(config.trials)]
    logger.info(f"{len(configs)} grid points, {len(tasks)} trials, {max(1, int(threads))} threads")
    start = time.monotonic()

    try:
        csvfile = open(out_path, mode='w', newline='')
    except OSError as e:
        raise ConfigurationError(f"cannot write {out_path}: {e}") from None

    with csvfile:
        def work(task):
            g, t = task
            return run_trial(configs[g], t, package_config)

        with ThreadPoolExecutor(max_workers=max(1, int(threads))) as executor:
            results = list(executor.map(work, tasks))

        records = [record for trial_records in results for record in trial_records]
        writer = csv.writer(csvfile, lineterminator='\n')
        writer.writerow(ResultRecord.header())
        for record in records:
            writer.writerow(record.row())

    failed = sum(1 for r in records if r.error)
    logger.info(f"wrote {len(records)} rows to {out_path} ({failed} failed) "
                f"in {format_duration(time.monotonic() - start)}")
    return records
