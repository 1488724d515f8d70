"""
End-to-end robust estimation.

`estimate_functional` runs the full pipeline for one model: naive
pruning, the map z -> g(z), the ellipsoid method against the
separation oracle, and hard thresholding of the weighted functional to
its 2s largest entries.

`joint_mean_cov_estimate` handles data whose mean and covariance are
both unknown and sparse. Pairwise differences of two batches have zero
mean and covariance 2 Sigma, so after scaling by 1/sqrt(2) they feed the
covariance model; a third batch is whitened with the estimate and
passed to the mean model.
"""
import math
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Optional

import numpy as np

from .config import DEFAULT_CONFIG
from .dataset import Dataset
from .ellipsoid import EllipsoidConfig, EstimateBundle, run_ellipsoid
from .errors import InputError
from .models import CovarianceModel, CovarianceParams, MeanModel, MeanParams
from .oracle import OracleConfig
from .pruning import prune


def _default_c_sep():
    return dict(DEFAULT_CONFIG['oracle']['c_sep'])


@dataclass(frozen=True)
class EstimatorConfig:
    """
    Every tunable of the pipeline.

    Attributes:
        c_prune (float): Constant multiplying the pruning thresholds.
        tau_prune (float): Pruning failure probability.
        c_sep (float, optional): Constant of the delta term of the
            acceptance threshold for every model; None uses `c_sep_models`.
        c_sep_models (dict): Per-model c_sep, keyed by model id.
        c_stat (float): Constant of the sampling term of the threshold.
        tau_sep (float, optional): Explicit acceptance threshold.
        spca_tol (float, optional): Relaxation tolerance; None derives it from eps.
        spca_max_iters (int): Relaxation iteration cap.
        spca_rho (float): Initial ADMM penalty.
        spca_adapt_factor (float): ADMM penalty rebalancing factor.
        radius (float): Initial ellipsoid radius.
        max_iters (int, optional): Ellipsoid iteration cap.
        max_iters_factor (int): Cap is max_iters_factor * m^2 when max_iters is None.
        volume_floor (float, optional): Ellipsoid volume floor.
        feasibility_tol (float): Tolerance of the polytope check.
        debug (bool): Assert the determinant decrease at every update.
        record_cuts (bool): Keep the replay log of cuts.
    """
    c_prune: float = 4.0
    tau_prune: float = 0.01
    c_sep: Optional[float] = None
    c_sep_models: Dict[str, float] = field(default_factory=_default_c_sep)
    c_stat: float = 1.5
    tau_sep: Optional[float] = None
    spca_tol: Optional[float] = None
    spca_max_iters: int = 5000
    spca_rho: float = 1.0
    spca_adapt_factor: float = 2.0
    radius: float = 2.0
    max_iters: Optional[int] = None
    max_iters_factor: int = 500
    volume_floor: Optional[float] = None
    feasibility_tol: float = 1e-8
    debug: bool = False
    record_cuts: bool = False

    @classmethod
    def from_config(cls, config, **overrides):
        """
        Build from a `load_config` dictionary; keyword overrides win.

        `[oracle] c_sep` may be one number for every model or a table
        keyed by model id; models missing from the table keep the
        package default.
        """
        pruning = config.get('pruning', {})
        oracle = config.get('oracle', {})
        spca = config.get('spca', {})
        ellipsoid = config.get('ellipsoid', {})
        values = dict(
            c_prune=pruning.get('c_prune', cls.c_prune),
            tau_prune=pruning.get('tau_prune', cls.tau_prune),
            c_stat=oracle.get('c_stat', cls.c_stat),
            spca_tol=spca.get('tol'),
            spca_max_iters=spca.get('max_iters', cls.spca_max_iters),
            spca_rho=spca.get('rho', cls.spca_rho),
            spca_adapt_factor=spca.get('adapt_factor', cls.spca_adapt_factor),
            radius=ellipsoid.get('radius', cls.radius),
            max_iters_factor=ellipsoid.get('max_iters_factor', cls.max_iters_factor),
            feasibility_tol=ellipsoid.get('feasibility_tol', cls.feasibility_tol),
            debug=ellipsoid.get('debug', cls.debug),
        )
        c_sep = oracle.get('c_sep')
        if isinstance(c_sep, dict):
            values['c_sep_models'] = {**_default_c_sep(), **c_sep}
        elif c_sep is not None:
            values['c_sep'] = float(c_sep)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def c_sep_for(self, model):
        """The c_sep used for `model`."""
        if self.c_sep is not None:
            return float(self.c_sep)
        return float(self.c_sep_models.get(model.model_id.value, 1.0))

    def oracle_config(self, model, epsilon, n_points=None):
        """Oracle settings for `model` on `n_points` samples (after pruning)."""
        return OracleConfig.for_model(model, epsilon, n_points=n_points, c_sep=self.c_sep_for(model),
                                      c_stat=self.c_stat, tau_sep=self.tau_sep, spca_tol=self.spca_tol,
                                      spca_max_iters=self.spca_max_iters, spca_rho=self.spca_rho,
                                      spca_adapt_factor=self.spca_adapt_factor)

    def ellipsoid_config(self):
        return EllipsoidConfig(max_iters=self.max_iters, volume_floor=self.volume_floor, radius=self.radius,
                               max_iters_factor=self.max_iters_factor, feasibility_tol=self.feasibility_tol,
                               debug=self.debug, record_cuts=self.record_cuts)


def estimate_functional(dataset, model, config=None):
    """
    Robustly estimate the functional of `model` from a contaminated sample.

    Args:
        dataset (Dataset): Samples; `dataset.epsilon` is the contamination
            fraction the weights are capped for. Labels are not read.
        model (ModelAdapter): Model adapter.
        config (EstimatorConfig, optional): Pipeline settings.

    Returns:
        EstimateBundle: with `kept_indices` listing the samples that
        survived pruning (the weights refer to them, in order).

    Raises:
        InputError, EstimationError, NumericalError: From pruning or
        the ellipsoid stage.
    """
    config = config or EstimatorConfig()
    logger = logging.getLogger("Estimator")
    logger.info(f"-----{model.model_id.value} estimate: n={dataset.n}, d={dataset.d}, "
                f"s={model.s}, eps={dataset.epsilon}-----")

    pruned, pruned_model = prune(model, dataset, tau_prune=config.tau_prune, c_prune=config.c_prune)
    points = pruned_model.g_batch(pruned)
    oracle_config = config.oracle_config(pruned_model, dataset.epsilon, n_points=pruned.n)

    bundle = run_ellipsoid(points, pruned_model, oracle_config, config.ellipsoid_config(),
                           epsilon=dataset.epsilon)
    return replace(bundle, kept_indices=pruned.indices.copy())


@dataclass(frozen=True, eq=False)
class JointEstimate:
    """
    Attributes:
        mu_hat (np.ndarray): Estimated mean.
        sigma_hat (np.ndarray): Estimated covariance I + S_hat.
        regularized (bool): True when eigenvalues of Sigma_hat were
            raised to the floor before whitening.
        mean_bundle (EstimateBundle): Mean-model run on the whitened batch.
        cov_bundle (EstimateBundle): Covariance-model run on the differences.
    """
    mu_hat: np.ndarray
    sigma_hat: np.ndarray
    regularized: bool
    mean_bundle: EstimateBundle
    cov_bundle: EstimateBundle


def difference_batch(first, second):
    """
    (x_i - x'_i)/sqrt(2) over paired rows; contamination treated as 2 eps.

    A pair is labelled Good only when both of its rows are.
    """
    if first.n != second.n:
        raise InputError(f"batches differ in size: {first.n} and {second.n}")
    labels = None
    if first.has_labels and second.has_labels:
        labels = first.labels & second.labels
    return Dataset(
        x=(first.x - second.x) / math.sqrt(2.0),
        labels=labels,
        epsilon=min(2 * first.epsilon, 0.49),
        seed=first.seed,
        indices=first.indices,
    )


def joint_mean_cov_estimate(dataset, config=None, s_mean=1, s_cov=2, rho_cov=1.0, eig_floor=1e-6):
    """
    Estimate a sparse mean and a sparse covariance perturbation together.

    The data is split into three equal batches: differences of the first
    two give Sigma_hat = I + S_hat through the covariance model; the
    third, whitened by Sigma_hat^{-1/2}, gives the mean in whitened
    coordinates, mapped back by Sigma_hat^{1/2}.

    Args:
        dataset (Dataset): Samples from (1 - eps) N(mu, I + S) + eps Q.
        config (EstimatorConfig, optional): Pipeline settings for both runs.
        s_mean (int): Sparsity of mu.
        s_cov (int): Number of nonzero entries of S (counting both triangles).
        rho_cov (float): Bound on |S|_F used by the covariance constants.
        eig_floor (float): Smallest eigenvalue allowed in Sigma_hat.

    Returns:
        JointEstimate
    """
    config = config or EstimatorConfig()
    logger = logging.getLogger("JointEstimator")
    first, second, third = dataset.split(3)
    d = dataset.d

    cov_model = CovarianceModel(params=CovarianceParams(S_mat=np.zeros((d, d)), rho=rho_cov), s=s_cov)
    cov_bundle = estimate_functional(difference_batch(first, second), cov_model, config)
    sigma_hat = np.eye(d) + cov_model.to_matrix(cov_bundle.theta_hat)

    eigvals, eigvecs = np.linalg.eigh(sigma_hat)
    regularized = bool(eigvals[0] < eig_floor)
    if regularized:
        logger.warning(f"covariance estimate has eigenvalue {eigvals[0]:.3g}; raising to {eig_floor:g}")
        eigvals = np.maximum(eigvals, eig_floor)
        sigma_hat = (eigvecs * eigvals) @ eigvecs.T
    inv_sqrt = (eigvecs / np.sqrt(eigvals)) @ eigvecs.T
    sqrt = (eigvecs * np.sqrt(eigvals)) @ eigvecs.T

    whitened = replace(third, x=third.x @ inv_sqrt)
    mean_model = MeanModel(params=MeanParams(mu=np.zeros(d)), s=s_mean)
    mean_bundle = estimate_functional(whitened, mean_model, config)

    return JointEstimate(mu_hat=sqrt @ mean_bundle.theta_hat, sigma_hat=sigma_hat, regularized=regularized,
                         mean_bundle=mean_bundle, cov_bundle=cov_bundle)
