"""
Separation oracle over sample weights.

Given weights w, the oracle thresholds the weighted functional to
theta_hat = P_2s(sum_i w_i g(z_i)), forms the deviation matrix

    E = sum_i w_i (g(z_i) - theta_hat)(g(z_i) - theta_hat)^T - F(theta_hat),

and solves the sparse PCA relaxation of E. If the optimal value
lambda* is at most tau_sep the weights are accepted; otherwise the
oracle returns the hyperplane

    l(w') = sum_i a_i w'_i + b,  a_i = (g(z_i) - theta_hat)^T H* (g(z_i) - theta_hat),
                                 b   = -tr(F(theta_hat) H*) - lambda*,

with theta_hat and H* frozen at the query weights, so l(w) = 0 and
good weights satisfy l < 0.

Classes
-------
- OracleConfig: acceptance threshold and solver settings.
- OracleVerdict: "Yes" or a cut, with the quantities that produced it.
- SeparationOracle: binds model and points, counts calls.

Functions
---------
- sampling_level: the finite-sample part of the default threshold.
- evaluate_oracle: one oracle query.
"""
import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import InputError
from .helpers import weighted_scatter
from .spca import SpcaProblem, solve_relaxation
from .thresholding import top_k


@dataclass(frozen=True)
class OracleConfig:
    """
    Attributes:
        tau_sep (float): Acceptance threshold on lambda*.
        s (int): Sparsity; the relaxation uses l_{1,1} radius s and the
            estimate keeps 2s entries.
        spca_tol (float): Solver residual tolerance.
        spca_max_iters (int): Solver iteration cap.
        spca_rho (float): Initial solver penalty.
        spca_adapt_factor (float): Solver penalty rebalancing factor.
    """
    tau_sep: float
    s: int
    spca_tol: float = 1e-6
    spca_max_iters: int = 5000
    spca_rho: float = 1.0
    spca_adapt_factor: float = 2.0

    def __post_init__(self):
        if self.tau_sep <= 0:
            raise InputError(f"tau_sep must be positive, got {self.tau_sep}")
        if self.s < 1:
            raise InputError(f"s must be positive, got {self.s}")
        if self.spca_adapt_factor <= 1:
            raise InputError(f"spca_adapt_factor must exceed 1, got {self.spca_adapt_factor}")

    @classmethod
    def for_model(cls, model, epsilon, n_points=None, c_sep=1.0, c_stat=0.0, tau_sep=None, spca_tol=None,
                  spca_max_iters=5000, spca_rho=1.0, spca_adapt_factor=2.0):
        """
        Default configuration for `model` at contamination `epsilon`.

        tau_sep = c_sep (L_F^2 + L_cov) delta + c_stat sampling_level(model, n_points)
        and the solver tolerance is eps/10 (L_F^2 + L_cov), both floored
        at 1e-6 so clean data (delta = 0) still gets a positive threshold.
        The sampling term is dropped when `n_points` is None.
        """
        L_F, L_cov = model.regularity_constants()
        scale = L_F ** 2 + L_cov
        if spca_tol is None:
            spca_tol = max(1e-6, epsilon / 10 * scale)
        if tau_sep is None:
            tau_sep = c_sep * scale * model.delta(epsilon)
            if n_points is not None:
                tau_sep += c_stat * sampling_level(model, n_points)
            tau_sep = max(tau_sep, 2 * spca_tol)
        return cls(tau_sep=float(tau_sep), s=int(model.s), spca_tol=float(spca_tol),
                   spca_max_iters=int(spca_max_iters), spca_rho=float(spca_rho),
                   spca_adapt_factor=float(spca_adapt_factor))


def sampling_level(model, n_points):
    """
    L_cov s sqrt(log(2 d_g) / m): the order of lambda* at the ideal
    weights of m clean samples, where the delta term alone is too small
    unless m is far beyond s^2 log(d_g) / delta^2.
    """
    if n_points < 1:
        raise InputError(f"n_points must be positive, got {n_points}")
    return model.L_cov * model.s * math.sqrt(math.log(2 * model.d_g) / n_points)


class VerdictKind(str, Enum):
    YES = 'Yes'
    CUT = 'Cut'


@dataclass(frozen=True, eq=False)
class OracleVerdict:
    """
    Oracle answer. For a cut, `a` and `b` define l(w') = <a, w'> + b,
    built from the relaxation solution `H_star`.

    `converged` and `iterations` describe the relaxation solve.
    """
    kind: VerdictKind
    lambda_star: float
    theta_hat: np.ndarray
    a: Optional[np.ndarray] = None
    b: Optional[float] = None
    H_star: Optional[np.ndarray] = None
    converged: bool = True
    iterations: int = 0

    @property
    def is_cut(self):
        return self.kind is VerdictKind.CUT

    def hyperplane(self, w):
        """l(w) for a cut."""
        if not self.is_cut:
            raise InputError("a Yes verdict has no hyperplane")
        return float(np.dot(self.a, w) + self.b)


def weighted_deviation_matrix(weights, points, model, theta_hat):
    """
    sum_i w_i (g_i - theta_hat)(g_i - theta_hat)^T - F(theta_hat).

    Args:
        weights (np.ndarray): (m,) weights.
        points (np.ndarray): (m, d_g) functional points g(z_i).
        model (ModelAdapter): Supplies F.
        theta_hat (np.ndarray): (d_g,) centering vector.
    """
    weights = np.asarray(weights, dtype=float).reshape(-1)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if weights.shape[0] != points.shape[0]:
        raise InputError(f"{weights.shape[0]} weights for {points.shape[0]} points")
    scatter = weighted_scatter(points, weights, np.asarray(theta_hat, dtype=float))
    E = scatter - model.covariance_map(theta_hat)
    return 0.5 * (E + E.T)


def evaluate_oracle(weights, points, model, config):
    """
    Accept `weights` or return a separating hyperplane through them.

    When the relaxation does not converge the verdict is still produced
    from the last iterate, but weights are accepted only if lambda* plus
    the residual slack |E|_F * primal_residual stays below tau_sep.

    Returns:
        OracleVerdict
    """
    w = np.asarray(weights, dtype=float).reshape(-1)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if w.shape[0] != points.shape[0]:
        raise InputError(f"{w.shape[0]} weights for {points.shape[0]} points")

    theta_hat = top_k(w @ points, 2 * config.s).values
    E = weighted_deviation_matrix(w, points, model, theta_hat)
    solution = solve_relaxation(SpcaProblem(E=E, s=config.s, tol=config.spca_tol,
                                            max_iters=config.spca_max_iters, rho=config.spca_rho,
                                            adapt_factor=config.spca_adapt_factor))
    lam = solution.lambda_star

    slack = 0.0 if solution.converged else float(np.linalg.norm(E)) * solution.primal_residual
    if lam + slack <= config.tau_sep:
        return OracleVerdict(kind=VerdictKind.YES, lambda_star=lam, theta_hat=theta_hat,
                             converged=solution.converged, iterations=solution.iterations)

    H = solution.H_star
    dev = points - theta_hat
    a = np.einsum('ni,ij,nj->n', dev, H, dev)
    b = -float(np.sum(model.covariance_map(theta_hat) * H)) - lam
    return OracleVerdict(kind=VerdictKind.CUT, lambda_star=lam, theta_hat=theta_hat, a=a, b=b, H_star=H,
                         converged=solution.converged, iterations=solution.iterations)


class SeparationOracle:
    """Oracle bound to a fixed set of functional points."""

    def __init__(self, points, model, config):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.model = model
        self.config = config
        self.calls = 0
        self.unconverged = 0
        self.logger = logging.getLogger("SeparationOracle")
        self.logger.debug(f"oracle ready: m={self.points.shape[0]}, d_g={self.points.shape[1]}, "
                          f"tau_sep={config.tau_sep:.4g}")

    def __call__(self, weights):
        verdict = evaluate_oracle(weights, self.points, self.model, self.config)
        self.calls += 1
        if not verdict.converged:
            self.unconverged += 1
        return verdict
