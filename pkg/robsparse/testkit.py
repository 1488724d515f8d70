"""
Independent checks used by the test suite and the `verify` command.

Brute-force and Monte Carlo references that share no code path with
the estimator: exact s-sparse operator norms by enumeration, empirical
moments of g against the closed-form covariance maps, the deviation
conditions a dataset must satisfy for the estimator's guarantee, and a
replay of the cuts of a full run against the ideal weights.

Classes
-------
- SparseNorm: result of `sparse_opnorm_exact`.
- MomentReport: result of `monte_carlo_cov_check`.
- ConditionReport: result of `check_conditions`.
- ReplayReport: result of `replay_oracle`.
- CheckResult: one row of a verify suite.

Functions
---------
- sparse_opnorm_exact, sparse_restricted_l2_exact
- monte_carlo_cov_check
- ideal_weights, renormalized_restriction, sample_polytope_weights
- check_conditions
- replay_oracle
- verify: run a named suite (`available_suites`).

Notes
-----
- The deviation conditions on sparse norms are universally quantified
  over the weight polytope; they are spot-checked on sampled weights
  and the report says so.
- The 'oracle', 'robustness', 'dimension', 'epsilon' and 'covariance'
  suites are seeded experiments under the package configuration (no
  hand-set tau_sep). They run the full estimator many times and take
  minutes to hours; their keyword options shrink them.
"""
import math
import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Dict, NamedTuple

import numpy as np

from .config import DEFAULT_CONFIG
from .ellipsoid import EllipsoidEstimator, WeightPolytope
from .errors import ConfigurationError, EstimationError, InputError
from .estimator import EstimatorConfig
from .harness import RunConfig, run_trial, simulate_trial
from .helpers import make_rng, weighted_scatter
from .models import (CovarianceModel, CovarianceParams, GlmModel, GlmParams, LogisticModel,
                     RegressionModel, RegressionParams)
from .oracle import evaluate_oracle
from .pruning import prune
from .spca import SpcaProblem, solve_relaxation
from .thresholding import sparse_restricted_l2, top_k


# Enumeration guard
MAX_ENUM_DIM = 20
MAX_ENUM_SUBSETS = 10 ** 6


class SparseNorm(NamedTuple):
    """Max over |S| <= s of |M_SS|_op, and of lambda_max(M_SS)."""
    value: float
    max_eig_value: float


def _check_enumeration(p, s):
    if p > MAX_ENUM_DIM or math.comb(p, min(s, p)) > MAX_ENUM_SUBSETS:
        raise InputError(f"refusing to enumerate C({p}, {s}) subsets "
                         f"(limits: p <= {MAX_ENUM_DIM}, at most {MAX_ENUM_SUBSETS} subsets)")


def sparse_opnorm_exact(M, s, chunk=20000):
    """
    Exact s-sparse operator norm by enumeration.

    Principal submatrix eigenvalues interlace, so subsets of size exactly
    min(s, p) attain both maxima.

    Args:
        M (np.ndarray): Symmetric p x p matrix.
        s (int): Subset size bound.

    Returns:
        SparseNorm: (max |eigenvalue|, max signed eigenvalue).

    Raises:
        InputError: If p > 20 or C(p, s) > 10^6.
    """
    M = np.asarray(M, dtype=float)
    p = M.shape[0]
    if s < 1:
        raise InputError(f"s must be positive, got {s}")
    _check_enumeration(p, s)
    k = min(s, p)

    value, max_eig = 0.0, -math.inf
    subsets = itertools.combinations(range(p), k)
    while True:
        batch = np.array(list(itertools.islice(subsets, chunk)), dtype=int)
        if batch.size == 0:
            break
        blocks = M[batch[:, :, None], batch[:, None, :]]
        eigvals = np.linalg.eigvalsh(blocks)
        value = max(value, float(np.max(np.abs(eigvals))))
        max_eig = max(max_eig, float(np.max(eigvals[:, -1])))
    return SparseNorm(value=value, max_eig_value=max_eig)


def sparse_restricted_l2_exact(v, s):
    """max over |S| <= s of |v^S|_2, by enumeration."""
    v = np.asarray(v, dtype=float).reshape(-1)
    _check_enumeration(v.shape[0], s)
    k = min(s, v.shape[0])
    return max(float(np.linalg.norm(v[list(S)])) for S in itertools.combinations(range(v.shape[0]), k))


# Moments
@dataclass(frozen=True, eq=False)
class MomentReport:
    """
    Empirical mean and covariance of g against theta_g and F(theta_g).

    Deviations are scaled by their empirical standard errors (which
    shrink like sqrt(1/N)); the check passes when every scaled deviation
    is at most `tolerance_scale`.
    """
    N: int
    mean_deviation: float
    cov_deviation: float
    mean_zscore: float
    cov_zscore: float
    mean_relative_error: float
    cov_relative_opnorm_error: float
    tolerance_scale: float
    empirical_cov: np.ndarray = field(repr=False)

    @property
    def passed(self):
        return self.mean_zscore <= self.tolerance_scale and self.cov_zscore <= self.tolerance_scale


def _zscore(deviation, stderr):
    with np.errstate(divide='ignore', invalid='ignore'):
        z = np.where(stderr > 0, np.abs(deviation) / stderr, np.where(np.abs(deviation) <= 1e-12, 0.0, np.inf))
    return float(np.max(z))


def monte_carlo_cov_check(model, N, seed, tolerance_scale=5.0):
    """
    Compare the empirical moments of g over N clean samples with the model.

    Args:
        model (ModelAdapter): Model under test.
        N (int): Number of samples, at least 10^4.
        seed (int): Sampling seed.
        tolerance_scale (float): Allowed deviation in standard errors.

    Returns:
        MomentReport
    """
    if N < 10 ** 4:
        raise InputError(f"need N >= 10^4 samples for a moment check, got {N}")
    G = model.g_batch(model.sample_clean(N, seed))
    theta = model.functional()
    F = model.covariance_map(theta)

    mean = G.mean(axis=0)
    D = G - mean
    cov = D.T @ D / N
    mean_stderr = np.sqrt(np.mean(D ** 2, axis=0) / N)
    # var(D_i D_j) = E[D_i^2 D_j^2] - cov_ij^2
    fourth = (D ** 2).T @ (D ** 2) / N
    cov_stderr = np.sqrt(np.maximum(fourth - cov ** 2, 0.0) / N)

    theta_norm = np.linalg.norm(theta)
    return MomentReport(
        N=int(N),
        mean_deviation=float(np.max(np.abs(mean - theta))),
        cov_deviation=float(np.max(np.abs(cov - F))),
        mean_zscore=_zscore(mean - theta, mean_stderr),
        cov_zscore=_zscore(cov - F, cov_stderr),
        mean_relative_error=float(np.linalg.norm(mean - theta) / theta_norm) if theta_norm > 0 else math.nan,
        cov_relative_opnorm_error=float(np.linalg.norm(cov - F, 2) / np.linalg.norm(F, 2)),
        tolerance_scale=float(tolerance_scale),
        empirical_cov=cov,
    )


# Weights
def ideal_weights(labels):
    """Uniform weights on the Good samples."""
    labels = np.asarray(labels, dtype=bool)
    good = int(np.count_nonzero(labels))
    if good == 0:
        raise EstimationError("no Good samples")
    return labels / good


def renormalized_restriction(w, labels):
    """w restricted to the Good samples and rescaled to sum to one."""
    w = np.asarray(w, dtype=float) * np.asarray(labels, dtype=bool)
    total = w.sum()
    if total <= 0:
        raise EstimationError("weights put no mass on Good samples")
    return w / total


def sample_polytope_weights(m, epsilon, rng, vertices=3):
    """
    Uniform mixture of `vertices` random vertices of S_{m,eps}.

    A vertex puts the cap on floor(1/cap) samples and the remainder on
    one more.
    """
    cap = WeightPolytope(m, epsilon).cap
    full = min(int(math.floor(1.0 / cap + 1e-12)), m)
    w = np.zeros(m)
    for _ in range(vertices):
        order = rng.permutation(m)
        vertex = np.zeros(m)
        vertex[order[:full]] = cap
        if full < m:
            vertex[order[full]] = max(1.0 - full * cap, 0.0)
        w += vertex / vertex.sum()
    return w / vertices


# Deviation conditions
@dataclass(frozen=True, eq=False)
class ConditionReport:
    """
    The five deviation conditions of a labelled dataset.

    `measured` and `thresholds` share keys; each boolean is
    measured <= threshold for its key. The two `_samples` conditions
    are spot checks over `weight_samples` sampled weights (the worst
    sample is recorded), not proofs over the whole polytope.
    """
    bad_count_ok: bool
    linf_mean_ok: bool
    sparse_l2_ok_samples: bool
    linf_cov_ok: bool
    sparse_op_ok_samples: bool
    measured: Dict[str, float]
    thresholds: Dict[str, float]
    w_good: np.ndarray = field(repr=False)
    w_g_restricted: np.ndarray = field(repr=False)
    weight_samples: int = 0

    @property
    def all_ok(self):
        return all((self.bad_count_ok, self.linf_mean_ok, self.sparse_l2_ok_samples,
                    self.linf_cov_ok, self.sparse_op_ok_samples))

    def rows(self):
        return [(name, self.measured[name], self.thresholds[name], self.measured[name] <= self.thresholds[name])
                for name in self.measured]


def check_conditions(dataset, model, delta=None, weight_samples=50, constant=1.0, seed=0):
    """
    Evaluate the deviation conditions behind the estimator's guarantee.

    With Delta(w) = sum_i w_i g_i - theta and
    E(w) = sum_i w_i (g_i - theta)(g_i - theta)^T - F(theta):
        |B| <= 2 eps n
        |Delta(w*)|_inf <= C (L_F + sqrt(L_cov)) delta / s
        |P_s(Delta(w^g))|_2 <= C (L_F + sqrt(L_cov)) delta
        |E(w*)|_inf <= C (L_F^2 + L_cov) delta / s
        |E(w^g)|_{s,op} <= C (L_F^2 + L_cov) delta
    where w* is uniform on the Good samples and w^g the renormalized
    restriction of a weight vector w in S_{n,eps}.

    Args:
        dataset (Dataset): Labelled samples.
        model (ModelAdapter): Model with the true parameter.
        delta (float, optional): Accuracy parameter; default model.delta(eps).
        weight_samples (int): Number of sampled weights for the spot checks.
        constant (float): The constant C.
        seed (int): Seed of the weight sampler.

    Raises:
        ConfigurationError: If the dataset has no labels.
        InputError: If the exact sparse norm would need too many subsets.
    """
    if not dataset.has_labels:
        raise ConfigurationError("check_conditions needs hidden labels")
    n, eps, s = dataset.n, dataset.epsilon, model.s
    delta = model.delta(eps) if delta is None else float(delta)
    L_F, L_cov = model.regularity_constants()
    _check_enumeration(model.d_g, s)

    G = model.g_batch(dataset)
    theta = model.functional()
    F = model.covariance_map(theta)

    def deviation(w):
        return w @ G - theta

    def scatter_error(w):
        return weighted_scatter(G, w, theta) - F

    w_star = ideal_weights(dataset.labels)
    mean_scale = constant * (L_F + math.sqrt(L_cov)) * delta
    cov_scale = constant * (L_F ** 2 + L_cov) * delta

    measured = {
        'bad_count': float(np.count_nonzero(~dataset.labels)),
        'linf_mean': float(np.max(np.abs(deviation(w_star)))),
        'linf_cov': float(np.max(np.abs(scatter_error(w_star)))),
    }
    thresholds = {
        'bad_count': 2 * eps * n,
        'linf_mean': mean_scale / s,
        'linf_cov': cov_scale / s,
    }

    rng = make_rng(seed, 4)
    worst_l2, worst_op, worst_w = 0.0, 0.0, w_star
    for _ in range(int(weight_samples)):
        w_g = renormalized_restriction(sample_polytope_weights(n, eps, rng), dataset.labels)
        l2 = sparse_restricted_l2(deviation(w_g), s)
        op = sparse_opnorm_exact(scatter_error(w_g), s).value
        worst_l2 = max(worst_l2, l2)
        if op >= worst_op:
            worst_op, worst_w = op, w_g
    measured['sparse_l2'] = worst_l2
    measured['sparse_op'] = worst_op
    thresholds['sparse_l2'] = mean_scale
    thresholds['sparse_op'] = cov_scale

    ok = {name: measured[name] <= thresholds[name] for name in measured}
    return ConditionReport(
        bad_count_ok=ok['bad_count'],
        linf_mean_ok=ok['linf_mean'],
        sparse_l2_ok_samples=ok['sparse_l2'],
        linf_cov_ok=ok['linf_cov'],
        sparse_op_ok_samples=ok['sparse_op'],
        measured=measured,
        thresholds=thresholds,
        w_good=w_star,
        w_g_restricted=worst_w,
        weight_samples=int(weight_samples),
    )


# Replay
@dataclass(frozen=True, eq=False)
class ReplayReport:
    """
    Attributes:
        accepts_ideal (bool): The oracle says Yes at w*.
        ideal_lambda (float): lambda* at w*.
        tau_sep (float): Acceptance threshold of the run.
        cut_values (np.ndarray): l(w*) for every oracle cut of the run.
        labels (np.ndarray): Hidden labels of the samples left after pruning.
        bundle (EstimateBundle): The run itself.
    """
    accepts_ideal: bool
    ideal_lambda: float
    tau_sep: float
    cut_values: np.ndarray
    labels: np.ndarray
    bundle: object

    @property
    def cuts_exclude_ideal(self):
        """Fraction of oracle cuts with l(w*) >= 0 is zero."""
        return bool(np.all(self.cut_values < 0))

    @property
    def bad_weight_mass(self):
        """Weight the returned vector puts on Bad samples."""
        return float(np.sum(self.bundle.weights.w[~self.labels]))


def replay_oracle(dataset, model, config=None):
    """
    Run the pipeline with a cut log and check every oracle cut against w*.

    Pruning, the threshold and the ellipsoid settings are derived from
    `config` exactly as `estimate_functional` derives them.

    Args:
        dataset (Dataset): Labelled samples.
        model (ModelAdapter): Model with the true parameter.
        config (EstimatorConfig, optional): Pipeline settings.

    Returns:
        ReplayReport
    """
    if not dataset.has_labels:
        raise ConfigurationError("replay needs hidden labels")
    config = replace(config or EstimatorConfig(), record_cuts=True)
    pruned, pruned_model = prune(model, dataset, tau_prune=config.tau_prune, c_prune=config.c_prune)
    points = pruned_model.g_batch(pruned)
    oracle_config = config.oracle_config(pruned_model, dataset.epsilon, n_points=pruned.n)

    w_star = ideal_weights(pruned.labels)
    ideal = evaluate_oracle(w_star, points, pruned_model, oracle_config)
    bundle = EllipsoidEstimator(points, pruned_model, oracle_config, config.ellipsoid_config(),
                                dataset.epsilon).run()
    values = np.array([cut.hyperplane(w_star) for cut in bundle.cuts if cut.source == 'oracle'])
    return ReplayReport(accepts_ideal=not ideal.is_cut, ideal_lambda=ideal.lambda_star,
                        tau_sep=oracle_config.tau_sep, cut_values=values, labels=pruned.labels.copy(),
                        bundle=bundle)


# Verify suites
@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    threshold: float
    passed: bool

    def as_dict(self):
        return {'name': self.name, 'measured': self.measured, 'threshold': self.threshold, 'passed': self.passed}


def _suite_lemmas(config, seed, instances=10 ** 4, d=50, s=5):
    """Thresholding sandwich on random instances, and the sparse l2 norm against enumeration."""
    rng = make_rng(seed, 10)
    worst_lower, worst_upper = -math.inf, -math.inf
    for _ in range(instances):
        theta = np.zeros(d)
        theta[rng.choice(d, size=s, replace=False)] = rng.standard_normal(s)
        theta_tilde = theta + rng.exponential() * rng.standard_normal(d)
        delta_hat = np.linalg.norm(top_k(theta_tilde, 2 * s).values - theta)
        restricted = sparse_restricted_l2(theta_tilde - theta, s)
        worst_lower = max(worst_lower, delta_hat / 5 - restricted)
        worst_upper = max(worst_upper, restricted - 4 * delta_hat)

    worst_gap = 0.0
    for _ in range(200):
        v = rng.standard_normal(12)
        k = int(rng.integers(1, 5))
        worst_gap = max(worst_gap, abs(sparse_restricted_l2(v, k) - sparse_restricted_l2_exact(v, k)))

    return [
        CheckResult('sandwich lower: |D_hat|/5 - |P_s(D)|', worst_lower, 1e-12, worst_lower <= 1e-12),
        CheckResult('sandwich upper: |P_s(D)| - 4|D_hat|', worst_upper, 1e-12, worst_upper <= 1e-12),
        CheckResult('sparse l2 vs enumeration', worst_gap, 1e-12, worst_gap <= 1e-12),
    ]


def _suite_moments(config, seed, N=2 * 10 ** 5):
    """Empirical covariance maps against the closed forms."""
    scale = config['testkit']['tolerance_scale']
    d = 5
    e1 = np.eye(d)[0]
    results = []

    reg = monte_carlo_cov_check(RegressionModel(params=RegressionParams(beta=e1), s=1), N, seed, scale)
    results.append(CheckResult('regression cov(yx) relative opnorm error', reg.cov_relative_opnorm_error,
                               0.05, reg.cov_relative_opnorm_error <= 0.05))
    results.append(CheckResult('regression moments z-score', max(reg.mean_zscore, reg.cov_zscore),
                               scale, reg.passed))

    glm = monte_carlo_cov_check(GlmModel(params=GlmParams(beta=e1, link='tanh'), s=1), N, seed + 1, scale)
    results.append(CheckResult('glm (tanh) mean relative error', glm.mean_relative_error,
                               0.03, glm.mean_relative_error <= 0.03))
    results.append(CheckResult('glm (tanh) moments z-score', max(glm.mean_zscore, glm.cov_zscore),
                               scale, glm.passed))

    logistic_model = LogisticModel(params=GlmParams(beta=e1, link='sigmoid'), s=1)
    logit = monte_carlo_cov_check(logistic_model, N, seed + 2, scale)
    kappa1 = logistic_model.params.kappa1
    diag = float(np.mean(np.diag(logit.empirical_cov)[1:]))
    relative = abs(diag - kappa1) / kappa1
    results.append(CheckResult('logistic F diagonal coefficient relative error', relative, 0.05, relative <= 0.05))

    S = np.zeros((3, 3))
    S[0, 1] = S[1, 0] = 0.4
    cov = monte_carlo_cov_check(CovarianceModel(params=CovarianceParams(S_mat=S), s=2), N // 4, seed + 3, scale)
    results.append(CheckResult('covariance fourth moments z-score', max(cov.mean_zscore, cov.cov_zscore),
                               scale, cov.passed))
    return results


def _suite_spca(config, seed, instances=200, tol=1e-6):
    """The relaxation value never falls below the exact sparse eigenvalue."""
    rng = make_rng(seed, 11)
    worst = -math.inf
    for k in range(instances):
        p = (6, 10, 12)[k % 3]
        s = 1 + (k // 3) % 3
        A = rng.standard_normal((p, p))
        E = (A + A.T) / 2
        exact = sparse_opnorm_exact(E, s).max_eig_value
        solution = solve_relaxation(SpcaProblem(E=E, s=s, tol=tol, max_iters=config['spca']['max_iters']))
        worst = max(worst, exact - solution.lambda_star)
    return [CheckResult('max sparse eigenvalue - lambda*', worst, 1e-5, worst <= 1e-5)]


def _mean_regime(seed, runs, n, d, s, epsilon, magnitude, max_iters, **extra):
    return RunConfig(model='mean', n=n, d=d, s=s, epsilon=epsilon, q_family='point_mass', q_magnitude=magnitude,
                     seed=seed, trials=runs, max_iters=max_iters, **extra)


def _median_errors(run_config, config, metric='l2_error'):
    """Median of `metric` per method over the trials; NaN when every run failed."""
    values = defaultdict(list)
    for trial in range(run_config.trials):
        for record in run_trial(run_config, trial, config):
            if not record.error:
                values[record.method].append(getattr(record, metric))
    return {method: float(np.median(values[method])) if values[method] else math.nan
            for method in run_config.methods}


def _ratio(a, b):
    return a / b if b > 0 else math.inf


def _suite_oracle(config, seed, runs=20, n=400, d=20, s=3, epsilon=0.1, magnitude=5.0, max_iters=20000):
    """
    Seeded mean-model runs with hidden labels, default threshold: the ideal
    weights are accepted whenever the deviation conditions hold, no oracle
    cut removes them, and the returned weights put little mass on Q.
    """
    testkit = config.get('testkit', {})
    run_config = _mean_regime(seed, runs, n, d, s, epsilon, magnitude, max_iters)
    estimator_config = run_config.estimator_config(config)
    results, bad_mass = [], []
    for trial in range(runs):
        model, dataset = simulate_trial(run_config, trial)
        conditions = check_conditions(dataset, model, weight_samples=testkit.get('weight_samples', 50),
                                      constant=testkit.get('condition_constant', 1.0),
                                      seed=run_config.trial_seed(trial))
        report = replay_oracle(dataset, model, estimator_config)
        bad_mass.append(report.bad_weight_mass)
        worst = float(np.max(report.cut_values)) if report.cut_values.size else -math.inf
        held = 'hold' if conditions.all_ok else 'fail'
        results.append(CheckResult(f'run {trial}: lambda*(w*), conditions {held}', report.ideal_lambda,
                                   report.tau_sep, report.accepts_ideal or not conditions.all_ok))
        results.append(CheckResult(f'run {trial}: max l(w*) over {report.cut_values.size} cuts', worst, 0.0,
                                   report.cuts_exclude_ideal))
    median_mass = float(np.median(bad_mass))
    results.append(CheckResult('median weight on Q', median_mass, 3 * epsilon, median_mass <= 3 * epsilon))
    return results


def _suite_robustness(config, seed, runs=10, magnitudes=(5.0, 50.0, 500.0), n=400, d=20, s=3, epsilon=0.1,
                      max_iters=20000):
    """The robust error does not follow the outlier magnitude; the naive one does."""
    robust, naive = [], []
    for magnitude in magnitudes:
        run_config = _mean_regime(seed, runs, n, d, s, epsilon, magnitude, max_iters)
        medians = _median_errors(run_config, config)
        robust.append(medians['robust'])
        naive.append(medians['naive_threshold'])

    spread = _ratio(max(robust), min(robust))
    growth = _ratio(naive[-1], naive[0])
    advantage = _ratio(robust[-1], naive[-1])
    return [
        CheckResult('robust median error, max/min over magnitudes', spread, 2.0, spread < 2.0),
        CheckResult(f'naive median error growth, R={magnitudes[-1]:g} vs R={magnitudes[0]:g}', growth, 10.0,
                    growth > 10.0),
        CheckResult(f'robust/naive median error at R={magnitudes[-1]:g}', advantage, 1 / 3, advantage < 1 / 3),
    ]


def _suite_dimension(config, seed, runs=5, dims=(50, 200, 800), n=600, s=3, epsilon=0.1, magnitude=5.0,
                     max_iters=20000):
    """
    The robust error grows mildly with the dimension at fixed n.

    Every oracle call solves a d x d relaxation, so the d = 800 runs take
    hours; pass smaller `dims` for a quick look.
    """
    medians = [_median_errors(_mean_regime(seed, runs, n, d, s, epsilon, magnitude, max_iters), config)['robust']
               for d in dims]
    growth = _ratio(medians[-1], medians[0])
    return [CheckResult(f'robust median error, d={dims[-1]} vs d={dims[0]}', growth, 2.0, growth <= 2.0)]


def _suite_epsilon(config, seed, runs=10, epsilons=(0.02, 0.05, 0.1, 0.2), n=400, d=20, s=3, magnitude=5.0,
                   max_iters=20000):
    """The robust error is nondecreasing in eps and close to the clean error at small eps."""
    def median(epsilon):
        run_config = _mean_regime(seed, runs, n, d, s, epsilon, magnitude, max_iters, methods=['robust'])
        return _median_errors(run_config, config)['robust']

    clean = median(0.0)
    medians = [median(epsilon) for epsilon in epsilons]
    results = []
    for (e0, m0), (e1, m1) in zip(zip(epsilons, medians), zip(epsilons[1:], medians[1:])):
        results.append(CheckResult(f'robust median error drop, eps={e0:g} -> {e1:g}', m0 - m1, 0.0, m1 >= m0))
    near_clean = _ratio(medians[0], clean)
    results.append(CheckResult(f'robust median error, eps={epsilons[0]:g} vs clean', near_clean, 2.0,
                               near_clean <= 2.0))
    return results


def _suite_covariance(config, seed, runs=5, n=2000, d=8, s=4, epsilon=0.05, factor=10.0, max_iters=20000):
    """Covariance model under variance inflation against the thresholded plug-in."""
    run_config = RunConfig(model='covariance', n=n, d=d, s=s, epsilon=epsilon, q_family='variance_inflation',
                           q_magnitude=factor, seed=seed, trials=runs, max_iters=max_iters)
    medians = _median_errors(run_config, config, metric='frob_error')
    ratio = _ratio(medians['robust'], medians['naive_threshold'])
    return [CheckResult('robust/naive median Frobenius error', ratio, 0.5, ratio <= 0.5)]


available_suites = {
    'lemmas': _suite_lemmas,
    'moments': _suite_moments,
    'spca': _suite_spca,
    'oracle': _suite_oracle,
    'robustness': _suite_robustness,
    'dimension': _suite_dimension,
    'epsilon': _suite_epsilon,
    'covariance': _suite_covariance,
}


def verify(suite, config=None, seed=0, **options):
    """
    Run a named property suite.

    Keyword options are passed to the suite (e.g. `runs` or `max_iters`
    for the experiment suites).

    Returns:
        list[CheckResult]

    Raises:
        ConfigurationError: For an unknown suite.
    """
    try:
        runner = available_suites[suite]
    except KeyError:
        raise ConfigurationError(f"unknown suite '{suite}', available: {sorted(available_suites)}") from None
    logger = logging.getLogger("Testkit")
    logger.info(f"-----verify {suite}-----")
    results = runner(config or DEFAULT_CONFIG, seed, **options)
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.warning(f"{len(failed)} of {len(results)} checks failed: {failed}")
    return results
