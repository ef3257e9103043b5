import numpy as np
import pytest

from nctorus.algebra import NcElement, ThetaMatrix

THETAS = [0.0, 0.25, 1 / np.sqrt(2)]


@pytest.fixture(params=THETAS, ids=["theta0", "theta025", "theta_irr"])
def theta(request):
    return ThetaMatrix.from_angle(request.param)


@pytest.fixture
def th25():
    return ThetaMatrix.from_angle(0.25)


def rand_elem(theta, rng, radius=3, terms=4):
    keys = rng.integers(-radius, radius + 1, size=(terms, theta.n))
    vals = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    return NcElement(theta, keys, vals)
