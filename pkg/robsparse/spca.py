"""
Convex relaxation of sparse PCA:

    maximize tr(E H)  subject to  H >= 0, tr(H) = 1, |H|_{1,1} <= s.

The program is solved by two-block operator splitting (ADMM with a
scaled dual variable). One block carries the linear objective and the
spectraplex {H >= 0, tr H = 1}, the other the l_{1,1} ball; both
projections have closed forms. The penalty adapts by residual
balancing.

Classes
-------
- SpcaProblem: the matrix E, radius s and solver settings.
- SpcaSolution: H*, lambda* = tr(E H*), residuals and convergence flag.
- SpcaSolver: runs the iteration and logs its progress.

Notes
-----
- lambda* is evaluated on the spectraplex block, so H* is PSD with unit
  trace up to rounding and the l_{1,1} bound holds up to the primal
  residual.
- The program certifies only the positive direction: it upper-bounds
  the largest s-sparse eigenvalue of E, not its largest magnitude.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError
from .helpers import symmetrize


def project_simplex(v, radius=1.0):
    """
    Euclidean projection of v onto {w >= 0, sum(w) = radius}.

    Sort-based algorithm, O(n log n).
    """
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u)
    # Number of positive components of the optimum
    rho = np.nonzero(u * np.arange(1, n + 1) > (cssv - radius))[0][-1]
    theta = (cssv[rho] - radius) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def project_spectraplex(M):
    """
    Frobenius-nearest point of {H >= 0, tr(H) = 1}.

    Eigendecomposes M and projects its eigenvalues onto the probability
    simplex.

    Raises:
        NumericalError: If the eigensolver does not converge.
    """
    M = symmetrize(M)
    try:
        eigvals, eigvecs = np.linalg.eigh(M)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"eigendecomposition failed: {e}",
                             diagnostics={'shape': M.shape, 'fro_norm': float(np.linalg.norm(M))}) from e
    weights = project_simplex(eigvals, 1.0)
    return symmetrize((eigvecs * weights) @ eigvecs.T)


def project_l11_ball(M, s):
    """
    Euclidean projection onto {H : sum_ij |H_ij| <= s}.

    Entrywise soft-thresholding at the level that puts the result on the
    boundary; matrices already inside the ball are returned unchanged.
    Symmetric input gives symmetric output.
    """
    if s <= 0:
        raise InputError(f"l11 radius must be positive, got {s}")
    M = np.asarray(M, dtype=float)
    magnitude = np.abs(M)
    if magnitude.sum() <= s:
        return M
    shrunk = project_simplex(magnitude.reshape(-1), float(s)).reshape(M.shape)
    return np.sign(M) * shrunk


@dataclass
class SpcaProblem:
    """
    Attributes:
        E (np.ndarray): p x p matrix, symmetrized on construction.
        s (float): l_{1,1} radius, s >= 1.
        tol (float): Target primal and dual residual.
        max_iters (int): Iteration cap.
        rho (float): Initial ADMM penalty.
        adapt_factor (float): Penalty multiplier used by residual balancing.
    """
    E: np.ndarray
    s: float
    tol: float = 1e-6
    max_iters: int = 5000
    rho: float = 1.0
    adapt_factor: float = 2.0

    def __post_init__(self):
        E = np.asarray(self.E, dtype=float)
        if E.ndim != 2 or E.shape[0] != E.shape[1]:
            raise InputError(f"E must be square, got shape {E.shape}")
        self.E = symmetrize(E)
        if self.s < 1:
            raise InputError(f"s must be at least 1, got {self.s}")
        if self.tol <= 0 or self.max_iters < 1:
            raise InputError("tol must be positive and max_iters at least 1")

    @property
    def p(self):
        return self.E.shape[0]


@dataclass(frozen=True, eq=False)
class SpcaSolution:
    H_star: np.ndarray
    lambda_star: float
    primal_residual: float
    dual_residual: float
    iterations: int
    converged: bool


class SpcaSolver:
    """ADMM for the sparse PCA relaxation."""

    # Rebalance the penalty when one residual exceeds the other by this ratio
    balance_ratio = 10.0

    def __init__(self, problem):
        self.problem = problem
        self.logger = logging.getLogger("SpcaSolver")

    def solve(self):
        pb = self.problem
        p, E = pb.p, pb.E
        rho = pb.rho
        Z = np.eye(p) / p
        U = np.zeros((p, p))
        H = Z
        primal = dual = np.inf

        iteration = 0
        converged = False
        for iteration in range(1, pb.max_iters + 1):
            H = project_spectraplex(Z - U + E / rho)
            Z_old = Z
            Z = project_l11_ball(H + U, pb.s)
            U = U + H - Z

            primal = float(np.linalg.norm(H - Z))
            dual = float(rho * np.linalg.norm(Z - Z_old))
            if primal < pb.tol and dual < pb.tol:
                converged = True
                break

            if primal > self.balance_ratio * dual:
                rho *= pb.adapt_factor
                U /= pb.adapt_factor
            elif dual > self.balance_ratio * primal:
                rho /= pb.adapt_factor
                U *= pb.adapt_factor

        lambda_star = float(np.sum(E * H))
        if converged:
            self.logger.debug(f"converged in {iteration} iterations, lambda*={lambda_star:.6g}")
        else:
            self.logger.debug(f"no convergence after {iteration} iterations "
                              f"(primal={primal:.3g}, dual={dual:.3g}); returning last iterate")
        return SpcaSolution(H_star=H, lambda_star=lambda_star, primal_residual=primal,
                            dual_residual=dual, iterations=iteration, converged=converged)


def solve_relaxation(problem):
    """Solve the sparse PCA relaxation described by `problem`."""
    return SpcaSolver(problem).solve()
