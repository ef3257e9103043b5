import numpy as np

from nctorus import symbols as S
from nctorus.algebra import NcElement, ThetaMatrix, adjoint, delta, exp_series
from nctorus.geometry import PseudoCone
from nctorus.calculus import (argument_sectors, ellipticity_data, multi_indices,
                              parametric_parametrix, parametrix, sharp, star)

TH = ThetaMatrix.from_angle(0.25)
U1 = NcElement.generator(TH, 1)
X = [np.array([1.0, 0.5]), np.array([-0.3, 2.0]), np.array([2.0, -1.0])]


def val(e, x, lam=None):
    return S.evaluate(e, x, lam, theta=TH)


def sym_val(sym, x, lam=None):
    return sym.assembled(x, lam)


def test_multi_indices():
    assert sorted(multi_indices(2, 2)) == [(0, 2), (1, 1), (2, 0)]


def test_sharp_xi_with_constant():
    a = NcElement.from_dict(TH, {(1, 0): 2.0, (0, 1): 1j, (1, -1): 0.5})
    r1 = S.differential_symbol(TH, {(1, 0): 1.0})
    r2 = S.constant_symbol(a)
    s = sharp(r1, r2)
    for x in X:
        ref = a.scale(x[0]) + delta((1, 0), a)
        assert (sym_val(s, x) - ref).norm0() < 1e-13
    assert s.exact


def test_sharp_with_one_and_commutative_leading_term():
    r1 = S.differential_symbol(TH, {(2, 0): U1, (0, 1): 3.0})
    s = sharp(r1, S.constant_symbol(NcElement.scalar(TH, 1)))
    for x in X:
        assert (sym_val(s, x) - sym_val(r1, x)).norm0() < 1e-13
    t0 = ThetaMatrix.zero(2)
    p = S.differential_symbol(t0, {(1, 0): 2.0})
    q = S.differential_symbol(t0, {(0, 2): 1.0})
    s = sharp(p, q)
    for x in X:
        assert abs(val(s.components[0].expr, x).scalar_value() - 2 * x[0] * x[1] ** 2) < 1e-12


def test_star_examples():
    a = NcElement.from_dict(TH, {(1, 0): 2.0, (0, 1): 1j})
    s = star(S.constant_symbol(a))
    assert (sym_val(s, X[0]) - adjoint(a)).norm0() < 1e-14
    s = star(S.differential_symbol(TH, {(1, 0): 1.0}))
    assert abs(sym_val(s, X[1]).scalar_value() - X[1][0]) < 1e-14
    s = star(S.differential_symbol(TH, {(1, 0): a}))
    for x in X:
        ref = adjoint(a).scale(x[0]) + delta((1, 0), adjoint(a))
        assert (sym_val(s, x) - ref).norm0() < 1e-13


def test_parametrix_of_laplacian():
    Q = parametrix(S.laplacian_symbol(TH), J=3)
    x = X[0]
    assert abs(val(Q.components[0].expr, x).scalar_value() - 1 / (x @ x)) < 1e-14
    for c in Q.components[1:]:
        assert S.is_zero(c.expr) or val(c.expr, x).norm0() < 1e-14


def test_parametrix_shifted_laplacian():
    P = S.laplacian_symbol(TH, 1.0)
    Q = parametrix(P, J=2)
    x = X[2]
    assert abs(val(Q.components[2].expr, x).scalar_value() + (x @ x) ** -2) < 1e-14


def test_parametric_parametrix_examples():
    lam = -0.7 + 0.4j
    Q = parametric_parametrix(S.laplacian_symbol(TH), J=3)
    for x in X:
        assert abs(val(Q.components[0].expr, x, lam).scalar_value() - 1 / (x @ x - lam)) < 1e-14
        for c in Q.components[1:]:
            assert S.is_zero(c.expr) or val(c.expr, x, lam).norm0() < 1e-14
    Q = parametric_parametrix(S.laplacian_symbol(TH, 1.0), J=4)
    for x in X:
        g = 1 / (x @ x - lam)
        assert val(Q.components[1].expr, x, lam).norm0() < 1e-14
        assert abs(val(Q.components[2].expr, x, lam).scalar_value() + g ** 2) < 1e-13
        assert abs(val(Q.components[4].expr, x, lam).scalar_value() - g ** 3) < 1e-13
    assert isinstance(Q.components[0].expr, S.Inv)


def test_leading_term_of_composition_with_parametrix_is_one():
    k = exp_series((U1 + adjoint(U1)).scale(0.1), 20, 10)
    ks = S.constant_symbol(k)
    P = sharp(sharp(ks, S.laplacian_symbol(TH)), ks)
    Q = parametrix(P, J=2)
    s = sharp(P, Q, J=0)
    for x in X:
        v = S.evaluate(s.components[0].expr, x * 5, theta=TH)
        assert (v - 1.0).norm0() < 1e-9


def test_ellipticity_laplacian():
    e = ellipticity_data(S.laplacian_symbol(TH).principal(), TH)
    assert abs(e.c - 1) < 1e-12 and abs(e.c_prime - 1) < 1e-12
    assert e.positive()
    cone = e.theta_cone
    assert cone.contains(-1.0) and cone.contains(1j) and not cone.contains(2.0)


def test_ellipticity_kdk_positive():
    U1s = adjoint(U1)
    k = exp_series((U1 + U1s).scale(0.2 / 2), 30, 12)
    ks = S.constant_symbol(k)
    P = sharp(sharp(ks, S.laplacian_symbol(TH)), ks)
    e = ellipticity_data(P.principal(), TH, count=16)
    assert e.positive(tol=1e-8)
    assert e.theta_cone.contains(-3.0) and not e.theta_cone.contains(3.0)


def test_argument_sectors_selfadjoint_cloud():
    secs = argument_sectors(np.array([-2.0, -1.0, 1.0, 3.0]))
    cone = PseudoCone(secs)
    assert cone.contains(1j) and cone.contains(-1j)
    assert not cone.contains(2.0)
