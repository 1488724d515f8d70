"""
This module runs the ellipsoid method over the weight polytope

    S_{m,eps} = {w : sum_i w_i = 1, 0 <= w_i <= 1/((1 - 2 eps) m)}

against the separation oracle, and packages the result.

The sum constraint is removed by the affine parameterization
w = 1/m + B z, where the columns of B are an orthonormal basis of the
sum-zero subspace (the Helmert basis). The ellipsoid lives in the
reduced coordinates z, of dimension q = m - 1.

Classes
-------
- WeightVector: a weight vector with a feasibility check.
- WeightPolytope: geometry of S_{m,eps}, feasibility cuts.
- Feasible, ViolatedCut: results of `WeightPolytope.check`.
- EllipsoidState: center and shape matrix of the current ellipsoid.
- EllipsoidConfig: iteration cap, volume floor, radius, debug flags.
- CutRecord: one entry of the optional replay log.
- EstimateBundle: estimate, weights and run diagnostics.
- EllipsoidEstimator: the main loop.

Functions
---------
- ellipsoid_update: central-cut update of an EllipsoidState.
- run_ellipsoid: convenience wrapper around EllipsoidEstimator.

Notes
-----
- On any termination other than an accepting oracle call, the weights
  returned are the feasible weights with the smallest lambda* seen.
- With eps = 0 (or a single point) the polytope is the single uniform
  vector; the oracle is queried once and no ellipsoid is built.
"""
import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np
from scipy.linalg import helmert

from .errors import EllipsoidStateError, EstimationError, InputError
from .oracle import SeparationOracle
from .thresholding import top_k


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Weights w over m samples."""
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'w', np.asarray(self.w, dtype=float).reshape(-1))

    def __array__(self, dtype=None, copy=None):
        return self.w if dtype is None else self.w.astype(dtype)

    def __len__(self):
        return self.w.shape[0]

    def is_feasible(self, epsilon, tol=1e-8):
        return isinstance(WeightPolytope(len(self), epsilon).check(self.w, tol), Feasible)


@dataclass(frozen=True)
class Feasible:
    pass


@dataclass(frozen=True, eq=False)
class ViolatedCut:
    """Linear constraint l(w') = <a, w'> + b with l(w) > 0 and l <= 0 on the polytope."""
    a: np.ndarray
    b: float
    violation: float


class WeightPolytope:
    """
    The polytope S_{m,eps} and its affine parameterization.

    Attributes:
        m (int): Number of weights.
        epsilon (float): Contamination fraction in [0, 1/2).
        cap (float): Upper bound 1/((1 - 2 eps) m) on each weight.
        basis_B (np.ndarray): (m, m-1) orthonormal basis of the sum-zero subspace.
    """

    def __init__(self, m, epsilon):
        if m < 1:
            raise InputError(f"need at least one weight, got m={m}")
        if not 0 <= epsilon < 0.5:
            raise InputError(f"epsilon must lie in [0, 1/2), got {epsilon}")
        self.m = int(m)
        self.epsilon = float(epsilon)
        self.cap = 1.0 / ((1 - 2 * self.epsilon) * self.m)
        self.basis_B = helmert(self.m, full=False).T if self.m > 1 else np.zeros((1, 0))

    @property
    def uniform(self):
        return np.full(self.m, 1.0 / self.m)

    @property
    def is_single_point(self):
        """True when the cap forces the uniform weights."""
        return self.m == 1 or self.cap * self.m <= 1 + 1e-12

    def to_weights(self, z):
        return self.uniform + self.basis_B @ z

    def to_reduced(self, w):
        return self.basis_B.T @ (np.asarray(w, dtype=float) - self.uniform)

    def check(self, w, tol=1e-8):
        """
        Feasibility of w within `tol`.

        Returns:
            Feasible, or the most violated of the constraints
            -w_i <= 0, w_i - cap <= 0 and |sum(w) - 1| <= 0 as a ViolatedCut.
        """
        w = np.asarray(w, dtype=float).reshape(-1)
        if w.shape[0] != self.m:
            raise InputError(f"weight vector has length {w.shape[0]}, expected {self.m}")

        lo, hi = int(np.argmin(w)), int(np.argmax(w))
        sum_gap = float(w.sum() - 1.0)
        candidates = [
            (-w[lo], 'lower', lo),
            (w[hi] - self.cap, 'upper', hi),
            (abs(sum_gap), 'sum', None),
        ]
        violation, kind, index = max(candidates, key=lambda c: c[0])
        if violation <= tol:
            return Feasible()

        a = np.zeros(self.m)
        if kind == 'lower':
            a[index] = -1.0
            return ViolatedCut(a=a, b=0.0, violation=float(violation))
        if kind == 'upper':
            a[index] = 1.0
            return ViolatedCut(a=a, b=-self.cap, violation=float(violation))
        sign = 1.0 if sum_gap > 0 else -1.0
        return ViolatedCut(a=sign * np.ones(self.m), b=-sign, violation=float(violation))


def polytope_check(w, polytope, tol=1e-8):
    """Feasible, or the most violated constraint of `polytope` at w."""
    return polytope.check(w, tol)


@dataclass(frozen=True, eq=False)
class EllipsoidState:
    """
    Ellipsoid {z : (z - c)^T P^{-1} (z - c) <= 1} in reduced coordinates.

    Attributes:
        center_z (np.ndarray): Center c, length q = m - 1.
        shape_P (np.ndarray): Symmetric positive definite q x q matrix.
        iteration (int): Number of updates applied.
    """
    center_z: np.ndarray
    shape_P: np.ndarray
    iteration: int = 0

    @classmethod
    def ball(cls, q, radius):
        return cls(center_z=np.zeros(q), shape_P=radius ** 2 * np.eye(q), iteration=0)

    @property
    def q(self):
        return self.center_z.shape[0]

    def logdet(self):
        sign, value = np.linalg.slogdet(self.shape_P)
        if sign <= 0:
            raise EllipsoidStateError("shape matrix is not positive definite",
                                      diagnostics={'iteration': self.iteration})
        return float(value)

    def is_positive_definite(self):
        try:
            np.linalg.cholesky(self.shape_P)
            return True
        except np.linalg.LinAlgError:
            return False

    def max_semi_axis(self):
        """sqrt of the largest eigenvalue of P."""
        return math.sqrt(max(float(np.linalg.eigvalsh(self.shape_P)[-1]), 0.0))


def ellipsoid_update(state, cut, debug=False):
    """
    Central-cut update keeping the half {z : <cut, z - c> <= 0}.

    For q >= 2:
        c' = c - P g / ((q + 1) sqrt(g^T P g))
        P' = q^2/(q^2 - 1) (P - 2/(q + 1) P g g^T P / (g^T P g))
    For q = 1 the interval is halved.

    Args:
        state (EllipsoidState): Current ellipsoid.
        cut (np.ndarray): Normal g in reduced coordinates, nonzero.
        debug (bool): Check positive definiteness and the determinant
            decrease det(P') <= exp(-1/q) det(P).

    Raises:
        EllipsoidStateError: If g^T P g <= 0 or a debug check fails.
    """
    g = np.asarray(cut, dtype=float).reshape(-1)
    P, z, q = state.shape_P, state.center_z, state.q
    Pg = P @ g
    gPg = float(g @ Pg)
    if not gPg > 0:
        raise EllipsoidStateError(f"g^T P g = {gPg:.3g} is not positive",
                                  diagnostics={'iteration': state.iteration, 'cut_norm': float(np.linalg.norm(g))})

    if q == 1:
        half = math.sqrt(float(P[0, 0]))
        new_z = z - np.sign(g) * half / 2
        new_P = P / 4
    else:
        b = Pg / math.sqrt(gPg)
        new_z = z - b / (q + 1)
        new_P = (q ** 2 / (q ** 2 - 1.0)) * (P - (2.0 / (q + 1)) * np.outer(b, b))
        new_P = 0.5 * (new_P + new_P.T)

    new_state = EllipsoidState(center_z=new_z, shape_P=new_P, iteration=state.iteration + 1)

    if debug:
        if not new_state.is_positive_definite():
            raise EllipsoidStateError("shape matrix lost positive definiteness",
                                      diagnostics={'iteration': new_state.iteration})
        before, after = state.logdet(), new_state.logdet()
        bound = -1.0 / q if q > 1 else math.log(0.25)
        if not after < before or after - before > bound + 1e-8 * max(1.0, abs(before)):
            raise EllipsoidStateError(f"determinant did not shrink enough: log ratio {after - before:.6g}, "
                                      f"bound {bound:.6g}", diagnostics={'iteration': new_state.iteration})
    return new_state


class Termination(str, Enum):
    ORACLE_YES = 'OracleYes'
    ITERATION_CAP = 'IterationCap'
    VOLUME_FLOOR = 'VolumeFloor'


@dataclass(frozen=True)
class EllipsoidConfig:
    """
    Attributes:
        max_iters (int, optional): Iteration cap; None means
            max_iters_factor * m^2.
        volume_floor (float, optional): Stop once the largest semi-axis
            of the ellipsoid drops below this; None means
            eps (sqrt(L_cov) + L_F) / (m D).
        radius (float): Initial ball radius in reduced coordinates.
        max_iters_factor (int): See max_iters.
        feasibility_tol (float): Tolerance of the polytope check.
        debug (bool): Check the determinant decrease at every update.
        record_cuts (bool): Keep a replay log of every cut.
    """
    max_iters: Optional[int] = None
    volume_floor: Optional[float] = None
    radius: float = 2.0
    max_iters_factor: int = 500
    feasibility_tol: float = 1e-8
    debug: bool = False
    record_cuts: bool = False


@dataclass(frozen=True, eq=False)
class CutRecord:
    """One cut of a run: l(w') = <a, w'> + b emitted at weights w."""
    iteration: int
    source: str
    a: np.ndarray
    b: float
    lambda_star: Optional[float]
    w: np.ndarray

    def hyperplane(self, w):
        return float(np.dot(self.a, w) + self.b)


@dataclass(frozen=True, eq=False)
class EstimateBundle:
    """
    Output of a run.

    Attributes:
        theta_tilde (np.ndarray): sum_i w_i g(z_i).
        theta_hat (np.ndarray): P_2s(theta_tilde).
        weights (WeightVector): Final weights over the pruned samples.
        best_lambda (float): lambda* at the returned weights.
        oracle_calls (int): Number of oracle evaluations.
        terminated_by (Termination): Why the loop stopped.
        iterations (int): Ellipsoid updates performed.
        tau_sep (float): Acceptance threshold used.
        unconverged_solves (int): Relaxation solves that hit their cap.
        cuts (list[CutRecord]): Replay log, empty unless requested.
        kept_indices (np.ndarray, optional): Positions of the pruned
            samples in the input dataset.
    """
    theta_tilde: np.ndarray
    theta_hat: np.ndarray
    weights: WeightVector
    best_lambda: float
    oracle_calls: int
    terminated_by: Termination
    iterations: int = 0
    tau_sep: float = math.nan
    unconverged_solves: int = 0
    cuts: List[CutRecord] = field(default_factory=list)
    kept_indices: Optional[np.ndarray] = None

    def summary(self):
        """JSON-friendly digest of the run."""
        support = np.flatnonzero(self.theta_hat)
        return {
            'theta_hat': {int(i): float(self.theta_hat[i]) for i in support},
            'support': [int(i) for i in support],
            'best_lambda': float(self.best_lambda),
            'tau_sep': float(self.tau_sep),
            'oracle_calls': int(self.oracle_calls),
            'iterations': int(self.iterations),
            'terminated_by': self.terminated_by.value,
            'unconverged_solves': int(self.unconverged_solves),
            'n_weights': len(self.weights),
            'min_weight': float(np.min(self.weights.w)),
            'max_weight': float(np.max(self.weights.w)),
        }


class EllipsoidEstimator:
    """
    Ellipsoid method over S_{m,eps} driven by the separation oracle.

    The loop maps the center to weights; infeasible weights are cut by
    the violated polytope constraint, feasible ones are sent to the
    oracle. The loop ends when the oracle accepts, after `max_iters`
    updates, or when the ellipsoid is thinner than the volume floor.
    """

    def __init__(self, points, model, oracle_config, run_config=None, epsilon=0.0):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.points.shape[0] == 0:
            raise InputError("no points to weight")
        self.model = model
        self.oracle_config = oracle_config
        self.run_config = run_config or EllipsoidConfig()
        self.polytope = WeightPolytope(self.points.shape[0], epsilon)
        self.oracle = SeparationOracle(self.points, model, oracle_config)

        m = self.polytope.m
        rc = self.run_config
        self.max_iters = rc.max_iters if rc.max_iters is not None else rc.max_iters_factor * m ** 2
        if rc.volume_floor is not None:
            self.volume_floor = rc.volume_floor
        elif math.isfinite(model.radius_D) and model.radius_D > 0:
            L_F, L_cov = model.regularity_constants()
            self.volume_floor = epsilon * (math.sqrt(L_cov) + L_F) / (m * model.radius_D)
        else:
            self.volume_floor = 0.0

        self.logger = logging.getLogger("EllipsoidEstimator")
        self.logger.debug(f"m={m}, eps={epsilon}, cap={self.polytope.cap:.4g}, max_iters={self.max_iters}, "
                          f"volume_floor={self.volume_floor:.3g}, tau_sep={oracle_config.tau_sep:.4g}")

    def _bundle(self, w, best_lambda, terminated_by, iterations, cuts):
        theta_tilde = w @ self.points
        theta_hat = top_k(theta_tilde, 2 * self.oracle_config.s).values
        return EstimateBundle(
            theta_tilde=theta_tilde,
            theta_hat=theta_hat,
            weights=WeightVector(w),
            best_lambda=float(best_lambda),
            oracle_calls=self.oracle.calls,
            terminated_by=terminated_by,
            iterations=iterations,
            tau_sep=self.oracle_config.tau_sep,
            unconverged_solves=self.oracle.unconverged,
            cuts=cuts,
        )

    def _below_floor(self, state):
        """Largest semi-axis below the volume floor; eigensolve only when it may be."""
        if self.volume_floor <= 0:
            return False
        P = state.shape_P
        # lambda_max >= trace / q
        if math.sqrt(max(float(np.trace(P)), 0.0) / state.q) >= self.volume_floor:
            return False
        return state.max_semi_axis() < self.volume_floor

    def run(self):
        """
        Returns:
            EstimateBundle

        Raises:
            EstimationError: If no feasible weight vector was ever visited.
            EllipsoidStateError: If the shape matrix degenerates.
        """
        polytope, rc = self.polytope, self.run_config
        cuts = []

        if polytope.is_single_point:
            w = polytope.uniform
            verdict = self.oracle(w)
            if rc.record_cuts and verdict.is_cut:
                cuts.append(CutRecord(0, 'oracle', verdict.a, verdict.b, verdict.lambda_star, w))
            terminated = Termination.ORACLE_YES if not verdict.is_cut else Termination.VOLUME_FLOOR
            self.logger.info(f"single-point polytope: lambda*={verdict.lambda_star:.4g}, {terminated.value}")
            return self._bundle(w, verdict.lambda_star, terminated, 0, cuts)

        state = EllipsoidState.ball(polytope.m - 1, rc.radius)
        best_lambda, best_w = math.inf, None
        terminated = Termination.ITERATION_CAP
        accepted_w, accepted_lambda = None, None

        iteration = 0
        while iteration < self.max_iters:
            w = polytope.to_weights(state.center_z)
            check = polytope.check(w, rc.feasibility_tol)
            if isinstance(check, ViolatedCut):
                a, b, lam, source = check.a, check.b, None, 'polytope'
            else:
                verdict = self.oracle(w)
                if not verdict.is_cut:
                    accepted_w, accepted_lambda = w, verdict.lambda_star
                    terminated = Termination.ORACLE_YES
                    break
                a, b, lam, source = verdict.a, verdict.b, verdict.lambda_star, 'oracle'
                if lam < best_lambda:
                    best_lambda, best_w = lam, w

            if rc.record_cuts:
                cuts.append(CutRecord(iteration, source, a, b, lam, w))

            g = polytope.basis_B.T @ a
            if not np.any(g):
                # The cut is constant on the polytope and cannot shrink the ellipsoid
                self.logger.warning(f"iteration {iteration}: {source} cut is flat on the polytope, stopping")
                terminated = Termination.VOLUME_FLOOR
                break

            state = ellipsoid_update(state, g, debug=rc.debug)
            iteration = state.iteration
            if lam is not None:
                self.logger.debug(f"iteration {iteration}: lambda*={lam:.5g}")

            if self._below_floor(state):
                terminated = Termination.VOLUME_FLOOR
                break

        if accepted_w is not None:
            w, lam = accepted_w, accepted_lambda
        elif best_w is not None:
            w, lam = best_w, best_lambda
        else:
            raise EstimationError(f"no feasible weights visited in {iteration} iterations")

        self.logger.info(f"ellipsoid stopped ({terminated.value}) after {iteration} iterations, "
                         f"{self.oracle.calls} oracle calls, lambda*={lam:.4g}, tau_sep={self.oracle_config.tau_sep:.4g}")
        if self.oracle.unconverged:
            self.logger.warning(f"{self.oracle.unconverged} relaxation solves did not converge")
        return self._bundle(w, lam, terminated, iteration, cuts)


def run_ellipsoid(points, model, oracle_config, run_config=None, epsilon=0.0):
    """Run the ellipsoid method and return an EstimateBundle."""
    return EllipsoidEstimator(points, model, oracle_config, run_config, epsilon).run()
