import numpy as np
import pytest

from nctorus import symbols as S
from nctorus.algebra import LatticeBox, NcElement, ThetaMatrix
from nctorus.errors import ValidationError
from nctorus.toroidal import (Interpolant, ToroidalSymbolTable, build_phi, extend_toroidal,
                              restrict_to_lattice)

TH = ThetaMatrix.from_angle(0.25)


@pytest.fixture(scope="module")
def phi():
    return build_phi(2, check_radius=8)


def test_phi_interpolates(phi):
    assert abs(phi(np.zeros(2)) - 1) < 1e-10
    assert abs(phi(np.array([1.0, 0.0]))) < 1e-10
    pts = LatticeBox(2, 8).points[1:].astype(float)
    pts = pts[np.abs(pts).max(axis=1) > 0]
    assert np.max(np.abs(phi(pts))) < 1e-10


def test_phi_unit_integral(phi):
    assert abs(phi.integral() - 1) < 1e-6
    assert abs(Interpolant(1).integral() - 1) < 1e-6


def test_phi_rejects_wide_bump():
    with pytest.raises(ValidationError):
        Interpolant(2, half_width=0.6)


def test_restrict_examples():
    t = restrict_to_lattice(S.laplacian_symbol(TH), 3)
    for k, v in zip(t.box.points, t.values):
        assert v == NcElement.scalar(TH, float(k @ k)) or (k @ k == 0 and v.is_zero())
    t = restrict_to_lattice(S.bracket_symbol(TH, 2), 2)
    assert abs(t[(1, 1)].scalar_value() - 3) < 1e-14
    z = S.ClassicalSymbol(TH, [S.HomogeneousSymbol(S.ZERO, 0)])
    assert all(v.is_zero() for v in restrict_to_lattice(z, 2).values)


def test_extend_then_restrict_is_identity(phi):
    rng = np.random.default_rng(0)
    table = ToroidalSymbolTable.from_function(
        TH, 3, lambda k: NcElement(TH, rng.integers(-1, 2, (2, 2)), rng.normal(size=2)))
    rho = extend_toroidal(table, phi)
    for k, v in zip(table.box.points, table.values):
        assert (rho(k.astype(float)) - v).norm0() <= 1e-12


def test_extension_of_zero_table(phi):
    table = ToroidalSymbolTable.from_function(TH, 2, lambda k: NcElement.zero(TH))
    rho = extend_toroidal(table, phi)
    for x in ([0.3, 0.1], [1.5, -0.7]):
        assert rho(np.array(x)).is_zero()


def test_extension_between_lattice_points(phi):
    N = 3
    table = restrict_to_lattice(S.laplacian_symbol(TH), N)
    rho = extend_toroidal(table, phi)
    x = np.array([0.5, 0.0])
    pts = table.box.points.astype(float)
    bound = np.max(np.sum(pts ** 2, axis=1)) * np.sum(np.abs(phi(x[None, :] - pts)))
    assert abs(rho(x).scalar_value()) <= bound


def test_table_must_cover_box():
    with pytest.raises(ValidationError):
        ToroidalSymbolTable(TH, 1, [NcElement.zero(TH)] * 3)
