"""
Link functions for the GLM and logistic-type models.

Links are referenced by name so that run configurations stay plain
JSON. Each link carries its first two derivatives, which the moment
quadrature needs, and the constants C1 (bound on |u(0)|) and C2
(Lipschitz constant) used by the pruning thresholds.

Functions
---------
- get_link: look a link up in `available_links`.
- link_moments: the scalars E[u'(x')], kappa1, kappa2 of the covariance
  map F(beta) = kappa1 I + kappa2 beta beta^T, for x' ~ N(0, |beta|^2).
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.special import expit
from scipy.stats import norm

from .errors import DegenerateModelError, ModelConfigurationError


@dataclass(frozen=True)
class Link:
    """
    A scalar link u with derivatives and regularity constants.

    Attributes:
        name (str): Registry name.
        value (callable): u, vectorized over numpy arrays.
        grad (callable): u'.
        hess (callable): u''.
        c1 (float): Upper bound on |u(0)|.
        c2 (float): Lipschitz constant of u.
        probability (bool): True if u maps into [0, 1], as the logistic
            model requires.
    """
    name: str
    value: Callable
    grad: Callable
    hess: Callable
    c1: float
    c2: float
    probability: bool = False

    def __post_init__(self):
        if abs(float(self.value(np.array(0.0)))) > self.c1 + 1e-12:
            raise ModelConfigurationError(f"link {self.name}: |u(0)| exceeds C1={self.c1}")
        # Lipschitz spot check on a grid
        grid = np.linspace(-10.0, 10.0, 2001)
        u = self.value(grid)
        slopes = np.abs(np.diff(u)) / np.diff(grid)
        if np.max(slopes) > self.c2 * (1 + 1e-9):
            raise ModelConfigurationError(f"link {self.name}: not {self.c2}-Lipschitz on [-10, 10]")

    def __call__(self, z):
        return self.value(z)


def _sigmoid_grad(z):
    s = expit(z)
    return s * (1 - s)


def _sigmoid_hess(z):
    s = expit(z)
    return s * (1 - s) * (1 - 2 * s)


available_links = {
    'identity': Link('identity',
                     value=lambda z: np.asarray(z, dtype=float),
                     grad=lambda z: np.ones_like(np.asarray(z, dtype=float)),
                     hess=lambda z: np.zeros_like(np.asarray(z, dtype=float)),
                     c1=0.0, c2=1.0),
    'tanh': Link('tanh',
                 value=np.tanh,
                 grad=lambda z: 1 - np.tanh(z) ** 2,
                 hess=lambda z: -2 * np.tanh(z) * (1 - np.tanh(z) ** 2),
                 c1=0.0, c2=1.0),
    'sigmoid': Link('sigmoid',
                    value=expit,
                    grad=_sigmoid_grad,
                    hess=_sigmoid_hess,
                    c1=0.5, c2=0.25, probability=True),
    'probit': Link('probit',
                   value=norm.cdf,
                   grad=norm.pdf,
                   hess=lambda z: -z * norm.pdf(z),
                   c1=0.5, c2=float(norm.pdf(0.0)), probability=True),
}


def get_link(name):
    """Return the registered link called `name`."""
    try:
        return available_links[name]
    except KeyError:
        raise ModelConfigurationError(f"unknown link '{name}', available: {sorted(available_links)}") from None


@dataclass(frozen=True)
class LinkMoments:
    """The known scalars of a GLM/logistic covariance map."""
    slope: float
    kappa1: float
    kappa2: float


def gaussian_expectation(f, scale, degree=80):
    """E[f(z)] for z ~ N(0, scale^2), by Gauss-Hermite quadrature."""
    nodes, weights = hermegauss(degree)
    return float(np.sum(weights * f(scale * nodes)) / np.sqrt(2 * np.pi))


def link_moments(link, beta_norm, kind='glm', degree=80):
    """
    Compute E[u'(x')], kappa1 and kappa2 for x' = <x, beta> ~ N(0, |beta|^2).

    Args:
        link (Link or str): The link function.
        beta_norm (float): l2 norm of the true coefficient vector.
        kind (str): 'glm' for y = u(x') + noise, 'logistic' for binary
            responses with P(y=1|x) = u(x').
        degree (int): Number of quadrature nodes.

    Returns:
        LinkMoments: slope = E[u'], and kappa1, kappa2 such that
        cov(g) = kappa1 I + kappa2 beta beta^T for g = yx / slope.

    Raises:
        DegenerateModelError: If E[u'] vanishes.
    """
    if isinstance(link, str):
        link = get_link(link)
    E = lambda f: gaussian_expectation(f, float(beta_norm), degree)

    slope = E(link.grad)
    if abs(slope) < 1e-12:
        raise DegenerateModelError(f"link {link.name}: E[u'(x')] = 0 at |beta| = {beta_norm}")

    if kind == 'glm':
        kappa1 = (1 + E(lambda z: link.value(z) ** 2)) / slope ** 2
        # Stein: E[(u^2)'' ] - E[u']^2 with (u^2)'' = 2 u u'' + 2 u'^2
        second = E(lambda z: 2 * link.value(z) * link.hess(z) + 2 * link.grad(z) ** 2)
        kappa2 = (second - slope ** 2) / slope ** 2
    elif kind == 'logistic':
        kappa1 = E(link.value) / slope ** 2
        kappa2 = (E(link.hess) - slope ** 2) / slope ** 2
    else:
        raise ModelConfigurationError(f"unknown link model kind '{kind}'")
    return LinkMoments(slope=slope, kappa1=kappa1, kappa2=kappa2)
