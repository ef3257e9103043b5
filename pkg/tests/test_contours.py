import numpy as np
import pytest

from nctorus.contours import ContourSpec, contour_quadrature, path_rule
from nctorus.errors import PrecisionError, ValidationError


def branch(lam, arg):
    return np.exp(-0.5 * (np.log(np.abs(lam)) + 1j * arg))


def keyhole_value(r):
    # (1/2 pi i) int lambda^{-1/2} (2 - lambda)^{-1} around the slit (-inf, 0], clockwise around 2
    spec = ContourSpec.keyhole(r, np.pi, -np.pi, t_max=1e6, direction=-1)
    f = lambda lam, arg: branch(lam, arg) / (2 - lam)
    res = contour_quadrature(spec, f, tail_exponent=-1.5, vectorized=True, with_angle=True)
    return res.value / (2j * np.pi), res.error / (2 * np.pi)


def test_keyhole_recovers_residue():
    v, err = keyhole_value(0.5)
    assert abs(v - 1 / np.sqrt(2)) <= err + 1e-12
    assert err < 1e-2


def test_keyhole_invariant_under_radius_change():
    v1, e1 = keyhole_value(0.5)
    v2, e2 = keyhole_value(0.25)
    assert abs(v1 - v2) <= e1 + e2


def test_circle_residue():
    spec = ContourSpec.circle(3.0, 1.0, orientation=-1)
    res = contour_quadrature(spec, lambda l: l / (3 - l), vectorized=True, tol=1e-12)
    assert abs(res.value / (2j * np.pi) - 3) < 1e-12


def test_cauchy_zero():
    spec = ContourSpec.circle(0.0, 2.0, orientation=1)
    res = contour_quadrature(spec, lambda l: np.exp(l) * l ** 3, vectorized=True, tol=1e-12)
    assert abs(res.value) < 1e-12


def test_path_rule_length():
    spec = ContourSpec.circle(1 + 1j, 2.0, orientation=1)
    lam, w = path_rule(spec, 1)
    assert abs(np.sum(np.abs(w)) - 4 * np.pi) < 1e-12


def test_refusals():
    spec = ContourSpec.keyhole(0.5, np.pi, -np.pi)
    with pytest.raises(ValidationError):
        contour_quadrature(spec, lambda l: 1 / l, tail_exponent=-1.0, vectorized=True)
    with pytest.raises(ValidationError):
        ContourSpec.keyhole(0.5, 0.0, 1.0)
    with pytest.raises(ValidationError):
        ContourSpec("spiral")
    circ = ContourSpec.circle(0.0, 1.0, panels=1, order=2)
    with pytest.raises(PrecisionError):
        contour_quadrature(circ, lambda l: np.exp(20 * l), vectorized=True, tol=1e-14,
                           max_levels=1)
