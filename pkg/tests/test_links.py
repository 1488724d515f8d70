import numpy as np
import pytest

from robsparse.errors import DegenerateModelError, ModelConfigurationError
from robsparse.links import Link, gaussian_expectation, get_link, link_moments


def test_gaussian_expectation():
    assert gaussian_expectation(lambda z: z ** 2, 2.0) == pytest.approx(4.0)
    assert gaussian_expectation(lambda z: z ** 4, 1.0) == pytest.approx(3.0)
    assert gaussian_expectation(np.sin, 1.5) == pytest.approx(0.0, abs=1e-12)


def test_identity_link_reduces_to_regression():
    moments = link_moments('identity', 2.0, kind='glm')
    assert moments.slope == pytest.approx(1.0)
    assert moments.kappa1 == pytest.approx(5.0)
    assert moments.kappa2 == pytest.approx(1.0)


def test_logistic_moments_of_sigmoid():
    link = get_link('sigmoid')
    assert link.probability
    moments = link_moments(link, 0.0, kind='logistic')
    # At beta = 0: E[u'] = 1/4, E[u] = 1/2, E[u''] = 0
    assert moments.slope == pytest.approx(0.25)
    assert moments.kappa1 == pytest.approx(0.5 / 0.25 ** 2)
    assert moments.kappa2 == pytest.approx(-1.0)


def test_unknown_link():
    with pytest.raises(ModelConfigurationError):
        get_link('cubic')
    with pytest.raises(ModelConfigurationError):
        link_moments('identity', 1.0, kind='poisson')


def test_zero_slope_is_degenerate():
    cosine = Link(name='cos', value=np.cos, grad=lambda z: -np.sin(z), hess=lambda z: -np.cos(z), c1=1.0, c2=1.0)
    with pytest.raises(DegenerateModelError):
        link_moments(cosine, 1.0)


def test_link_constants_are_checked():
    with pytest.raises(ModelConfigurationError):
        Link(name='steep', value=lambda z: 5 * z, grad=lambda z: 5 + 0 * z, hess=lambda z: 0 * z, c1=0.0, c2=1.0)
    with pytest.raises(ModelConfigurationError):
        Link(name='offset', value=lambda z: z + 2, grad=lambda z: 1 + 0 * z, hess=lambda z: 0 * z, c1=1.0, c2=1.0)
