"""
This module provides the statistical models as interchangeable
adapters. Each adapter knows its functional map g, the algebraic form
F of cov(g) as a function of the functional, the regularity constants
(L_F, L_cov) of that map, how to draw clean data from P, and the
accuracy parameter delta its concentration bounds support.

Classes
-------
- ModelId: enumeration of the supported models.
- MeanParams, CovarianceParams, RegressionParams, GlmParams: model parameters.
- ModelAdapter: base class; subclasses override the model-specific maps.
- MeanModel, CovarianceModel, RegressionModel, GlmModel, LogisticModel.

Notes
-----
- Adapters and parameters are frozen after construction and safe to
  share across threads; samplers are pure functions of (params, n, seed).
- Covariance functionals are vectorized row-major; F is built on the
  symmetrized reshape of theta because a thresholded estimate need not
  be exactly symmetric.
- `radius_D` is infinite until pruning sets it (see `pruning.prune`).
"""
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import ClassVar, Optional

import numpy as np

from .dataset import Dataset
from .errors import InputError, DegenerateModelError, ModelConfigurationError
from .helpers import make_rng, symmetrize
from .links import get_link, link_moments


class ModelId(str, Enum):
    MEAN = 'mean'
    COVARIANCE = 'covariance'
    REGRESSION = 'regression'
    GLM = 'glm'
    LOGISTIC = 'logistic'


# Parameters
@dataclass(frozen=True, eq=False)
class MeanParams:
    """Sparse mean mu of N(mu, I)."""
    mu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'mu', np.asarray(self.mu, dtype=float).reshape(-1))


@dataclass(frozen=True, eq=False)
class CovarianceParams:
    """
    Sparse perturbation S of the identity, Sigma = I + S.

    S must be symmetric with zero diagonal (so tr Sigma = d) and Sigma
    positive definite. `rho` bounds |S|_F and defaults to it.
    """
    S_mat: np.ndarray
    rho: Optional[float] = None

    def __post_init__(self):
        S = np.asarray(self.S_mat, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise ModelConfigurationError(f"S must be square, got shape {S.shape}")
        if not np.allclose(S, S.T, atol=1e-12):
            raise ModelConfigurationError("S must be symmetric")
        if np.any(np.diag(S) != 0):
            raise ModelConfigurationError("S must have a zero diagonal")
        try:
            np.linalg.cholesky(np.eye(S.shape[0]) + S)
        except np.linalg.LinAlgError:
            raise ModelConfigurationError("Sigma = I + S is not positive definite") from None
        object.__setattr__(self, 'S_mat', symmetrize(S))
        if self.rho is None:
            object.__setattr__(self, 'rho', float(np.linalg.norm(S)))

    @property
    def sigma(self):
        return np.eye(self.S_mat.shape[0]) + self.S_mat


@dataclass(frozen=True, eq=False)
class RegressionParams:
    """y = <x, beta> + noise, x ~ N(0, I), noise ~ N(0, noise_sd^2)."""
    beta: np.ndarray
    rho: Optional[float] = None
    noise_sd: float = 1.0

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float).reshape(-1)
        object.__setattr__(self, 'beta', beta)
        if self.rho is None:
            object.__setattr__(self, 'rho', float(np.linalg.norm(beta)))
        if np.linalg.norm(beta) > self.rho * (1 + 1e-12):
            raise ModelConfigurationError(f"|beta|_2 = {np.linalg.norm(beta):.4g} exceeds rho = {self.rho}")
        if self.noise_sd <= 0:
            raise ModelConfigurationError("noise_sd must be positive")


@dataclass(frozen=True, eq=False)
class GlmParams:
    """
    GLM or logistic-type parameters.

    `slope` is E[u'(<x, beta>)], the divisor of g; `kappa1`, `kappa2`
    are the coefficients of F. They are known constants supplied by the
    caller; any left as None are computed from the link by quadrature
    when the adapter is built.
    """
    beta: np.ndarray
    rho: Optional[float] = None
    link: str = 'identity'
    slope: Optional[float] = None
    kappa1: Optional[float] = None
    kappa2: Optional[float] = None

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float).reshape(-1)
        object.__setattr__(self, 'beta', beta)
        if self.rho is None:
            object.__setattr__(self, 'rho', float(np.linalg.norm(beta)))
        if np.linalg.norm(beta) > self.rho * (1 + 1e-12):
            raise ModelConfigurationError(f"|beta|_2 = {np.linalg.norm(beta):.4g} exceeds rho = {self.rho}")
        # Validates the name
        get_link(self.link)
        if self.kappa1 is not None and self.kappa1 <= 0:
            raise ModelConfigurationError(f"kappa1 must be positive, got {self.kappa1}")

    def with_moments(self, kind):
        """Fill missing slope/kappa values from the link."""
        if None not in (self.slope, self.kappa1, self.kappa2):
            return self
        moments = link_moments(self.link, float(np.linalg.norm(self.beta)), kind=kind)
        return replace(
            self,
            slope=moments.slope if self.slope is None else self.slope,
            kappa1=moments.kappa1 if self.kappa1 is None else self.kappa1,
            kappa2=moments.kappa2 if self.kappa2 is None else self.kappa2,
        )


# Adapters
@dataclass(frozen=True, eq=False)
class ModelAdapter:
    """
    Base class for all models.

    Sub-classes override `g_batch`, `covariance_map`,
    `regularity_constants`, `functional`, `delta` and `_draw`.

    Attributes:
        params: The model parameters (type depends on the model).
        s (int): Sparsity of the functional.
        radius_D (float): Post-pruning bound on |g(z)|_2.
    """
    params: object
    s: int
    radius_D: float = math.inf

    model_id: ClassVar[ModelId]
    params_type: ClassVar[type]
    has_response: ClassVar[bool] = False

    def __post_init__(self):
        if not isinstance(self.params, self.params_type):
            raise ModelConfigurationError(
                f"{type(self).__name__} needs {self.params_type.__name__}, got {type(self.params).__name__}")
        if not 1 <= self.s <= self.d_g:
            raise ModelConfigurationError(f"sparsity must satisfy 1 <= s <= {self.d_g}, got {self.s}")
        if np.count_nonzero(self.functional()) > self.s:
            raise ModelConfigurationError(
                f"functional has {np.count_nonzero(self.functional())} nonzeros, more than s = {self.s}")

    @property
    def d(self):
        raise NotImplementedError

    @property
    def d_g(self):
        return self.d

    @property
    def L_F(self):
        return self.regularity_constants()[0]

    @property
    def L_cov(self):
        return self.regularity_constants()[1]

    @property
    def rho(self):
        """Norm bound of the functional used by the regularity constants."""
        return float(self.params.rho)

    def with_radius(self, radius_D):
        return replace(self, radius_D=float(radius_D))

    # Functional map
    def _check(self, dataset):
        if dataset.d != self.d:
            raise InputError(f"samples have dimension {dataset.d}, model expects {self.d}")
        if self.has_response and dataset.y is None:
            raise InputError(f"{self.model_id.value} model needs responses y")

    def apply_g(self, sample):
        """
        g of a single raw observation: x, or (y, x) for response models.

        Raises:
            InputError: On dimension mismatch or a missing response.
        """
        if self.has_response:
            try:
                y, x = sample
            except (TypeError, ValueError):
                raise InputError(f"{self.model_id.value} model expects a (y, x) pair") from None
            ds = Dataset(x=np.asarray(x, dtype=float).reshape(1, -1), y=[float(y)])
        else:
            ds = Dataset(x=np.asarray(sample, dtype=float).reshape(1, -1))
        return self.g_batch(ds)[0]

    def g_batch(self, dataset):
        """(n, d_g) array whose rows are g(z_i)."""
        raise NotImplementedError

    def covariance_map(self, theta):
        """F(theta), the covariance of g when the functional equals theta."""
        raise NotImplementedError

    def _theta(self, theta):
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape[0] != self.d_g:
            raise InputError(f"theta has length {theta.shape[0]}, expected {self.d_g}")
        return theta

    def regularity_constants(self):
        """(L_F, L_cov)"""
        raise NotImplementedError

    def functional(self):
        """The true theta_g(P)."""
        raise NotImplementedError

    def delta(self, epsilon):
        """Accuracy parameter of the good-weights definition for this model."""
        raise NotImplementedError

    # Sampling
    def sample_clean(self, n, seed):
        """
        Draw n i.i.d. samples from P, all labelled Good.

        Raises:
            InputError: If n < 1.
        """
        if n < 1:
            raise InputError(f"need n >= 1 samples, got {n}")
        rng = make_rng(seed)
        x, y = self._draw(int(n), rng)
        return Dataset(x=x, y=y, labels=np.ones(int(n), dtype=bool), epsilon=0.0, seed=int(seed))

    def _draw(self, n, rng):
        raise NotImplementedError


def _log_inv(epsilon):
    return math.log(1 / epsilon) if epsilon > 0 else 0.0


@dataclass(frozen=True, eq=False)
class MeanModel(ModelAdapter):
    """x ~ N(mu, I); g is the identity and F(theta) = I."""
    model_id: ClassVar[ModelId] = ModelId.MEAN
    params_type: ClassVar[type] = MeanParams

    @property
    def d(self):
        return self.params.mu.shape[0]

    @property
    def rho(self):
        return float(np.linalg.norm(self.params.mu))

    def g_batch(self, dataset):
        self._check(dataset)
        return dataset.x.copy()

    def covariance_map(self, theta):
        self._theta(theta)
        return np.eye(self.d)

    def regularity_constants(self):
        return 0.0, 1.0

    def functional(self):
        return self.params.mu.copy()

    def delta(self, epsilon):
        return epsilon * math.sqrt(_log_inv(epsilon))

    def _draw(self, n, rng):
        return self.params.mu + rng.standard_normal((n, self.d)), None


@dataclass(frozen=True, eq=False)
class CovarianceModel(ModelAdapter):
    """
    x ~ N(0, I + S); g(x) = vec(x x^T - diag(x x^T)).

    F is the exact Gaussian fourth-moment covariance
    cov(x_i x_j, x_k x_l) = Sigma_ik Sigma_jl + Sigma_il Sigma_jk
    on off-diagonal coordinates, with Sigma = I + S.
    """
    model_id: ClassVar[ModelId] = ModelId.COVARIANCE
    params_type: ClassVar[type] = CovarianceParams

    @property
    def d(self):
        return self.params.S_mat.shape[0]

    @property
    def d_g(self):
        return self.d ** 2

    def _diag_coords(self):
        return np.arange(self.d) * (self.d + 1)

    def g_batch(self, dataset):
        self._check(dataset)
        x = dataset.x
        G = np.einsum('ni,nj->nij', x, x).reshape(x.shape[0], -1)
        G[:, self._diag_coords()] = 0.0
        return G

    def to_matrix(self, theta):
        """Symmetrized d x d reshape of theta with the diagonal cleared."""
        S = symmetrize(self._theta(theta).reshape(self.d, self.d))
        np.fill_diagonal(S, 0.0)
        return S

    def covariance_map(self, theta):
        """
        F(theta) = (I + K)(Sigma kron Sigma) with Sigma = I + S(theta) and K
        the commutation matrix, rows and columns of diagonal coordinates
        cleared. It is the exact covariance of g, so F(0) is not zero:
        at Sigma = I each off-diagonal coordinate x_i x_j has variance 1
        and covariance 1 with its mirror x_j x_i.
        """
        d = self.d
        sigma = np.eye(d) + self.to_matrix(theta)
        kron = np.kron(sigma, sigma)
        # Column permutation (k, l) -> (l, k)
        swap = np.arange(d * d).reshape(d, d).T.reshape(-1)
        F = kron + kron[:, swap]
        diag = self._diag_coords()
        F[diag, :] = 0.0
        F[:, diag] = 0.0
        return symmetrize(F)

    def regularity_constants(self):
        rho = self.rho
        return 4.0 * (1.0 + rho), 2.0 * (1.0 + rho) ** 2

    def functional(self):
        return self.params.S_mat.reshape(-1).copy()

    def delta(self, epsilon):
        return epsilon * _log_inv(epsilon) ** 2

    def _draw(self, n, rng):
        L = np.linalg.cholesky(self.params.sigma)
        return rng.standard_normal((n, self.d)) @ L.T, None


@dataclass(frozen=True, eq=False)
class RegressionModel(ModelAdapter):
    """y = <x, beta> + noise; g(y, x) = y x; F(beta) = (|beta|^2 + 1) I + beta beta^T."""
    model_id: ClassVar[ModelId] = ModelId.REGRESSION
    params_type: ClassVar[type] = RegressionParams
    has_response: ClassVar[bool] = True

    @property
    def d(self):
        return self.params.beta.shape[0]

    def g_batch(self, dataset):
        self._check(dataset)
        return dataset.y[:, None] * dataset.x

    def covariance_map(self, theta):
        theta = self._theta(theta)
        noise_var = self.params.noise_sd ** 2
        return (theta @ theta + noise_var) * np.eye(self.d) + np.outer(theta, theta)

    def regularity_constants(self):
        rho = self.rho
        return 4.0 * rho, 2.0 * rho ** 2 + self.params.noise_sd ** 2

    def functional(self):
        return self.params.beta.copy()

    def delta(self, epsilon):
        return epsilon * _log_inv(epsilon) ** 2

    def _draw(self, n, rng):
        x = rng.standard_normal((n, self.d))
        y = x @ self.params.beta + self.params.noise_sd * rng.standard_normal(n)
        return x, y


@dataclass(frozen=True, eq=False)
class GlmModel(ModelAdapter):
    """
    y = u(<x, beta>) + noise; g(y, x) = y x / E[u'(x')];
    F(theta) = kappa1 I + kappa2 theta theta^T.
    """
    model_id: ClassVar[ModelId] = ModelId.GLM
    params_type: ClassVar[type] = GlmParams
    has_response: ClassVar[bool] = True
    link_kind: ClassVar[str] = 'glm'

    def __post_init__(self):
        if isinstance(self.params, GlmParams):
            object.__setattr__(self, 'params', self.params.with_moments(self.link_kind))
        super().__post_init__()

    @property
    def d(self):
        return self.params.beta.shape[0]

    @property
    def link(self):
        return get_link(self.params.link)

    def g_batch(self, dataset):
        self._check(dataset)
        slope = self.params.slope
        if slope == 0:
            raise DegenerateModelError("GLM divisor E[u'(x')] is zero")
        return dataset.y[:, None] * dataset.x / slope

    def covariance_map(self, theta):
        theta = self._theta(theta)
        return self.params.kappa1 * np.eye(self.d) + self.params.kappa2 * np.outer(theta, theta)

    def regularity_constants(self):
        rho = self.rho
        k1, k2 = self.params.kappa1, abs(self.params.kappa2)
        return 2.0 * k2 * rho, k1 + k2 * rho ** 2

    def functional(self):
        return self.params.beta.copy()

    def delta(self, epsilon):
        return epsilon * _log_inv(epsilon) ** 2

    def _draw(self, n, rng):
        x = rng.standard_normal((n, self.d))
        y = self.link(x @ self.params.beta) + rng.standard_normal(n)
        return x, y


@dataclass(frozen=True, eq=False)
class LogisticModel(GlmModel):
    """y in {0, 1} with P(y = 1 | x) = u(<x, beta>); same g as the GLM."""
    model_id: ClassVar[ModelId] = ModelId.LOGISTIC
    link_kind: ClassVar[str] = 'logistic'

    def delta(self, epsilon):
        return epsilon * _log_inv(epsilon)

    def _draw(self, n, rng):
        x = rng.standard_normal((n, self.d))
        p = self.link(x @ self.params.beta)
        if np.any(p < -1e-9) or np.any(p > 1 + 1e-9):
            raise ModelConfigurationError(f"link {self.params.link} leaves [0, 1] on sampled inputs")
        p = np.clip(p, 0.0, 1.0)
        y = (rng.random(n) < p).astype(float)
        return x, y


available_models = {
    ModelId.MEAN: MeanModel,
    ModelId.COVARIANCE: CovarianceModel,
    ModelId.REGRESSION: RegressionModel,
    ModelId.GLM: GlmModel,
    ModelId.LOGISTIC: LogisticModel,
}


def get_model_class(model_id):
    try:
        return available_models[ModelId(model_id)]
    except ValueError:
        raise ModelConfigurationError(
            f"unknown model '{model_id}', available: {[m.value for m in ModelId]}") from None
