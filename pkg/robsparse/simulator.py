"""
This module draws epsilon-contaminated datasets

    P_eps = (1 - eps) P + eps Q

for every model, with hidden Good/Bad labels kept for diagnostics.

Classes
-------
- ContaminationFamily: base class of the outlier distributions Q.
- PointMass, ClusteredShift, VarianceInflation, ResponseFlip: the families.
- ContaminationSpec: eps, a family and a seed.

Functions
---------
- sample_contaminated: the contaminated sampler.
- make_family: build a family by name from a single magnitude.

Notes
-----
- Each sample is independently Bad with probability eps; the count is
  binomial, not planted.
- Q never looks at the inliers, so the adversary is oblivious.
- Clean draws, the Bad mask and the outliers use separate child streams
  of the seed: eps = 0 reproduces `sample_clean` exactly.
"""
import math
import logging
from dataclasses import dataclass
from typing import ClassVar, Optional

import numpy as np

from .dataset import Dataset
from .errors import InputError
from .helpers import make_rng
from .models import ModelId


def _unit(d, index=0):
    e = np.zeros(d)
    e[index] = 1.0
    return e


def _direction(direction, d):
    """Normalized direction; defaults to (e_0 + e_1)/sqrt(2), or e_0 when d = 1."""
    if direction is None:
        u = _unit(d, 0) + (_unit(d, 1) if d > 1 else 0.0)
    else:
        u = np.asarray(direction, dtype=float).reshape(-1)
        if u.shape[0] != d:
            raise InputError(f"direction has length {u.shape[0]}, expected {d}")
    norm = np.linalg.norm(u)
    if norm == 0:
        raise InputError("direction must be nonzero")
    return u / norm


def _check_finite(**values):
    for name, value in values.items():
        if value is not None and not np.all(np.isfinite(np.asarray(value, dtype=float))):
            raise InputError(f"contamination parameter '{name}' must be finite")


@dataclass(frozen=True, eq=False)
class ContaminationFamily:
    """Base class. `draw` returns k outliers as (x, y), y None without responses."""
    name: ClassVar[str] = ''

    def draw(self, model, k, rng):
        raise NotImplementedError

    @staticmethod
    def _response(model, value, k):
        if not model.has_response:
            return None
        if value is None:
            value = 1.0 if model.model_id is ModelId.LOGISTIC else 0.0
        return np.full(k, float(value))


@dataclass(frozen=True, eq=False)
class PointMass(ContaminationFamily):
    """
    All outliers at one point: x = location (default magnitude * e_0),
    y = response (default magnitude, or 1 for logistic models).
    """
    name: ClassVar[str] = 'point_mass'
    magnitude: float = 5.0
    location: Optional[np.ndarray] = None
    response: Optional[float] = None

    def __post_init__(self):
        _check_finite(magnitude=self.magnitude, location=self.location, response=self.response)

    def draw(self, model, k, rng):
        d = model.d
        loc = self.magnitude * _unit(d) if self.location is None else np.asarray(self.location, dtype=float)
        if loc.shape != (d,):
            raise InputError(f"location has shape {loc.shape}, expected ({d},)")
        response = self.response
        if response is None and model.model_id is not ModelId.LOGISTIC:
            response = self.magnitude
        return np.tile(loc, (k, 1)), self._response(model, response, k)


@dataclass(frozen=True, eq=False)
class ClusteredShift(ContaminationFamily):
    """Outliers in a tight Gaussian cluster around `center` (default magnitude * e_0)."""
    name: ClassVar[str] = 'clustered_shift'
    magnitude: float = 5.0
    spread: float = 0.1
    center: Optional[np.ndarray] = None
    response: Optional[float] = None

    def __post_init__(self):
        _check_finite(magnitude=self.magnitude, spread=self.spread, center=self.center, response=self.response)
        if self.spread < 0:
            raise InputError(f"spread must be nonnegative, got {self.spread}")

    def draw(self, model, k, rng):
        d = model.d
        center = self.magnitude * _unit(d) if self.center is None else np.asarray(self.center, dtype=float)
        x = center + self.spread * rng.standard_normal((k, d))
        y = None
        if model.has_response:
            if model.model_id is ModelId.LOGISTIC:
                y = self._response(model, self.response, k)
            else:
                base = self.magnitude if self.response is None else self.response
                y = base + self.spread * rng.standard_normal(k)
        return x, y


@dataclass(frozen=True, eq=False)
class VarianceInflation(ContaminationFamily):
    """
    Gaussian outliers with covariance I + (factor - 1) u u^T.

    Centered at the true mean for the mean model and at zero otherwise;
    responses are N(0, factor), or fair coin flips for logistic models.
    """
    name: ClassVar[str] = 'variance_inflation'
    factor: float = 10.0
    direction: Optional[np.ndarray] = None

    def __post_init__(self):
        _check_finite(factor=self.factor, direction=self.direction)
        if self.factor <= 0:
            raise InputError(f"factor must be positive, got {self.factor}")

    def draw(self, model, k, rng):
        d = model.d
        u = _direction(self.direction, d)
        z = rng.standard_normal((k, d))
        x = z + (math.sqrt(self.factor) - 1.0) * np.outer(z @ u, u)
        if model.model_id is ModelId.MEAN:
            x += model.functional()
        y = None
        if model.has_response:
            if model.model_id is ModelId.LOGISTIC:
                y = (rng.random(k) < 0.5).astype(float)
            else:
                y = math.sqrt(self.factor) * rng.standard_normal(k)
        return x, y


@dataclass(frozen=True, eq=False)
class ResponseFlip(ContaminationFamily):
    """
    Adversarial (y, x) pairs for response models.

    Covariates are clean draws pushed by `leverage` along `direction`
    (default (e_0 + e_1)/sqrt(2)); responses are set to `magnitude`, or
    flipped (y -> 1 - y) for logistic models.
    """
    name: ClassVar[str] = 'response_flip'
    magnitude: float = 5.0
    leverage: float = 2.0
    direction: Optional[np.ndarray] = None

    def __post_init__(self):
        _check_finite(magnitude=self.magnitude, leverage=self.leverage, direction=self.direction)

    def draw(self, model, k, rng):
        if not model.has_response:
            raise InputError(f"response_flip needs a response model, got {model.model_id.value}")
        x, y = model._draw(k, rng)
        x = x + self.leverage * _direction(self.direction, model.d)
        if model.model_id is ModelId.LOGISTIC:
            y = 1.0 - y
        else:
            y = np.full(k, float(self.magnitude))
        return x, y


available_contaminations = {
    family.name: family for family in (PointMass, ClusteredShift, VarianceInflation, ResponseFlip)
}


def make_family(name, magnitude=None):
    """
    Family `name` with its main parameter (magnitude, or factor for
    variance inflation) set to `magnitude` when given.
    """
    try:
        family = available_contaminations[name]
    except KeyError:
        raise InputError(f"unknown contamination family '{name}', "
                         f"available: {sorted(available_contaminations)}") from None
    if magnitude is None:
        return family()
    if family is VarianceInflation:
        return family(factor=float(magnitude))
    return family(magnitude=float(magnitude))


@dataclass(frozen=True)
class ContaminationSpec:
    """
    Attributes:
        epsilon (float): Probability that a sample comes from Q, in [0, 1/2).
        q_family (ContaminationFamily): The outlier distribution Q.
        seed (int): Seed of the whole draw.
    """
    epsilon: float
    q_family: ContaminationFamily
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.epsilon < 0.5:
            raise InputError(f"epsilon must lie in [0, 1/2), got {self.epsilon}")
        if not isinstance(self.q_family, ContaminationFamily):
            raise InputError(f"q_family must be a ContaminationFamily, got {type(self.q_family).__name__}")


def sample_contaminated(model, n, spec):
    """
    Draw n samples from (1 - eps) P + eps Q.

    Args:
        model (ModelAdapter): Supplies P.
        n (int): Sample size, n >= 1.
        spec (ContaminationSpec): eps, Q and seed.

    Returns:
        Dataset: with hidden labels (True = drawn from P).
    """
    clean = model.sample_clean(n, spec.seed)
    if spec.epsilon == 0:
        return clean

    bad = make_rng(spec.seed, 1).random(clean.n) < spec.epsilon
    x = clean.x.copy()
    y = None if clean.y is None else clean.y.copy()
    k = int(np.count_nonzero(bad))
    if k:
        x_bad, y_bad = spec.q_family.draw(model, k, make_rng(spec.seed, 2))
        x[bad] = x_bad
        if y is not None:
            y[bad] = y_bad

    logging.getLogger("Simulator").debug(
        f"{spec.q_family.name}: {k} of {clean.n} samples from Q (eps={spec.epsilon})")
    return Dataset(x=x, y=y, labels=~bad, epsilon=spec.epsilon, seed=spec.seed)
