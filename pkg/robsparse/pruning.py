"""
Naive pruning rules that remove gross, easily detectable outliers
before the ellipsoid stage, one rule per model.

Every threshold the analysis states only up to a constant is
multiplied by `c_prune` (default 4). With probability 1 - tau_prune no
sample drawn from P is removed.

Functions
---------
- prune: apply the model's rule, returning the surviving subsequence
  and the model with `radius_D` set to the post-pruning bound on |g|_2.
- pruning_radius: that bound, without pruning anything.
"""
import math
import logging

import numpy as np
from scipy.spatial.distance import cdist

from .errors import EstimationError, InputError
from .models import ModelId


def _log_term(n, tau):
    return math.log(n / tau)


def _far_counts(x, threshold, block=1024):
    """For each row, the number of rows at distance >= threshold."""
    counts = np.empty(x.shape[0], dtype=int)
    for start in range(0, x.shape[0], block):
        dist = cdist(x[start:start + block], x)
        counts[start:start + block] = np.count_nonzero(dist >= threshold, axis=1)
    return counts


def _keep_mean(model, dataset, tau, c_prune):
    n, d = dataset.n, dataset.d
    threshold = c_prune * math.sqrt(d * _log_term(n, tau))
    return _far_counts(dataset.x, threshold) <= 2 * dataset.epsilon * n


def _keep_covariance(model, dataset, tau, c_prune):
    threshold = c_prune * dataset.d * math.sqrt(_log_term(dataset.n, tau))
    return np.linalg.norm(dataset.x, axis=1) < threshold


def _response_thresholds(model, dataset, tau, c_prune):
    log_term = math.sqrt(_log_term(dataset.n, tau))
    x_threshold = c_prune * dataset.d * log_term
    y_threshold = c_prune * (model.rho ** 2 + 1) * log_term
    return x_threshold, y_threshold


def _keep_regression(model, dataset, tau, c_prune):
    x_threshold, y_threshold = _response_thresholds(model, dataset, tau, c_prune)
    return (np.linalg.norm(dataset.x, axis=1) < x_threshold) & (np.abs(dataset.y) < y_threshold)


def _keep_glm(model, dataset, tau, c_prune):
    x_threshold, y_threshold = _response_thresholds(model, dataset, tau, c_prune)
    y_threshold += abs(float(model.link(np.array(0.0))))
    return (np.linalg.norm(dataset.x, axis=1) < x_threshold) & (np.abs(dataset.y) < y_threshold)


def _keep_logistic(model, dataset, tau, c_prune):
    threshold = c_prune * abs(model.params.slope) * math.sqrt(dataset.d * _log_term(dataset.n, tau))
    return np.linalg.norm(dataset.y[:, None] * dataset.x, axis=1) < threshold


pruning_rules = {
    ModelId.MEAN: _keep_mean,
    ModelId.COVARIANCE: _keep_covariance,
    ModelId.REGRESSION: _keep_regression,
    ModelId.GLM: _keep_glm,
    ModelId.LOGISTIC: _keep_logistic,
}


def pruning_radius(model, n, tau, c_prune):
    """
    Post-pruning bound on |g(z)|_2.

    Mean and covariance use their pruning thresholds; regression and
    GLM the product of the x and y thresholds (|g| = |y| |x|); logistic
    the |y x| threshold divided by the GLM slope.
    """
    d = model.d
    log_term = _log_term(max(n, 1), tau)
    if model.model_id is ModelId.MEAN:
        return c_prune * math.sqrt(d * log_term)
    if model.model_id is ModelId.COVARIANCE:
        return c_prune * d * math.sqrt(log_term)
    if model.model_id is ModelId.LOGISTIC:
        return c_prune * math.sqrt(d * log_term)
    x_threshold = c_prune * d * math.sqrt(log_term)
    y_threshold = c_prune * (model.rho ** 2 + 1) * math.sqrt(log_term)
    if model.model_id is ModelId.GLM:
        y_threshold += abs(float(model.link(np.array(0.0))))
        return x_threshold * y_threshold / abs(model.params.slope)
    return x_threshold * y_threshold


def prune(model, dataset, tau_prune=0.01, c_prune=4.0):
    """
    Run the model's naive pruning rule.

    Args:
        model (ModelAdapter): The model; its rule and constants are used.
        dataset (Dataset): Samples to prune; `epsilon` must be set.
        tau_prune (float): Failure probability in (0, 1).
        c_prune (float): Constant multiplying the thresholds.

    Returns:
        tuple[Dataset, ModelAdapter]: The surviving samples (a subsequence,
        order and labels preserved, rows never modified) and the model
        with `radius_D` set.

    Raises:
        InputError: On an empty dataset or tau_prune outside (0, 1).
        EstimationError: If every sample is removed.
    """
    logger = logging.getLogger("Pruning")
    if dataset.n == 0:
        raise InputError("cannot prune an empty dataset")
    if not 0 < tau_prune < 1:
        raise InputError(f"tau_prune must lie in (0, 1), got {tau_prune}")
    model._check(dataset)

    keep = pruning_rules[model.model_id](model, dataset, tau_prune, c_prune)
    if not np.any(keep):
        raise EstimationError(f"pruning removed all {dataset.n} samples; input looks pathological")

    removed = dataset.n - int(np.count_nonzero(keep))
    if removed > 2 * dataset.epsilon * dataset.n + 1:
        logger.warning(f"pruning removed {removed} of {dataset.n} samples, more than 2*eps*n")
    else:
        logger.debug(f"pruning removed {removed} of {dataset.n} samples")

    pruned = dataset.subset(keep)
    return pruned, model.with_radius(pruning_radius(model, dataset.n, tau_prune, c_prune))
