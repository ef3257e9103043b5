import numpy as np
import pytest

from nctorus import symbols as S
from nctorus.algebra import NcElement, ThetaMatrix, left_mult_matrix
from nctorus.calculus import parametric_parametrix, sharp, star
from nctorus.errors import ConfigurationError, ValidationError
from nctorus.experiments import kdk_symbol, random_differential_symbol
from nctorus.quantization import (TruncatedOperator, adjoint_op, compose, identity,
                                  interior_projector, op_norm, quantize, schatten_tail)
from nctorus.resolvent import exact_resolvent
from nctorus.toroidal import restrict_to_lattice

TH = ThetaMatrix.from_angle(0.25)


def test_laplacian_is_diagonal(theta):
    T = quantize(S.laplacian_symbol(theta), 4)
    k2 = np.sum(T.box.points.astype(float) ** 2, axis=1)
    assert np.array_equal(T.matrix, np.diag(k2).astype(complex))
    assert T.size == 81


def test_bracket_symbol_is_diagonal():
    T = quantize(S.bracket_symbol(TH, -1.5), 3)
    k2 = np.sum(T.box.points.astype(float) ** 2, axis=1)
    assert np.allclose(T.matrix, np.diag((1 + k2) ** -0.75), atol=1e-14)


def test_constant_symbol_is_left_multiplication():
    a = NcElement.from_dict(TH, {(1, 0): 2.0, (0, -1): 1j, (1, 1): -0.5})
    T = quantize(S.constant_symbol(a), 4)
    assert np.allclose(T.matrix, left_mult_matrix(a, 4), atol=1e-14)


def test_table_and_symbol_quantize_alike():
    a = NcElement.from_dict(TH, {(1, 0): 0.3})
    sym = S.ClassicalSymbol(TH, [S.HomogeneousSymbol(
        S.inverse(S.add(S.norm_sq(2), S.const(a + 2.0))), -2)], cutoff=None)
    T1 = quantize(sym, 3)
    T2 = quantize(restrict_to_lattice(sym, 3), 3)
    assert np.allclose(T1.matrix, T2.matrix, atol=1e-13)


def test_grid_path_matches_pointwise_quantization():
    P = kdk_symbol(TH, 0.2)
    Q = parametric_parametrix(P, 2)
    N = 3
    T = quantize(Q, N, lam=-20.0)
    ref = quantize(lambda k: Q.assembled(k.astype(float), -20.0), N, theta=TH)
    assert np.max(np.abs(T.matrix - ref.matrix)) < 1e-12


def test_exact_composition_on_interior(theta):
    rng = np.random.default_rng(11)
    r1 = random_differential_symbol(theta, rng)
    r2 = random_differential_symbol(theta, rng)
    N, margin = 8, 6
    A, B = quantize(r1, N), quantize(r2, N)
    C = quantize(sharp(r1, r2), N)
    m = interior_projector(N, margin)
    assert np.max(np.abs((A.matrix @ B.matrix - C.matrix)[np.ix_(m, m)])) <= 1e-10
    D = quantize(star(r1), N)
    assert np.max(np.abs((adjoint_op(A).matrix - D.matrix)[np.ix_(m, m)])) <= 1e-10


def test_laplacian_square_exact_everywhere():
    L = S.laplacian_symbol(TH)
    T = quantize(L, 5)
    assert np.max(np.abs(T.matrix @ T.matrix - quantize(sharp(L, L), 5).matrix)) <= 1e-12
    assert np.array_equal(adjoint_op(T).matrix, T.matrix)


def test_interior_projector_counts():
    assert interior_projector(8, 0).all()
    assert interior_projector(8, 2).sum() == 169


def test_operator_algebra_and_norms():
    T = quantize(S.laplacian_symbol(TH), 3)
    I = identity(TH, 3)
    assert np.array_equal(compose(T, I).matrix, T.matrix)
    assert abs(op_norm(I, 1.5, 1.5) - 1) < 1e-12
    assert abs(op_norm(T) - 18) < 1e-12
    L1 = quantize(S.laplacian_symbol(TH, 1.0), 3)
    B = quantize(S.bracket_symbol(TH, -2), 3)
    assert abs(np.linalg.norm(B.matrix @ L1.matrix, 2) - 1) < 1e-12
    with pytest.raises(ConfigurationError):
        compose(T, identity(TH, 2))


def test_schatten_examples():
    R = exact_resolvent(quantize(S.laplacian_symbol(TH, 1.0), 10), -1.0)
    assert schatten_tail(R, 1).passed
    f = schatten_tail(quantize(S.bracket_symbol(TH, -1.0), 10))
    assert abs(f.exponent + 0.5) <= 0.1
    f = schatten_tail(identity(TH, 6))
    assert abs(f.exponent) < 1e-12
    with pytest.raises(ValidationError):
        schatten_tail(identity(TH, 1))


def test_json_round_trip(tmp_path):
    T = quantize(S.differential_symbol(TH, {(1, 0): NcElement.generator(TH, 2)}), 2)
    p = tmp_path / "t.json"
    T.save(p)
    import json
    back = TruncatedOperator.from_json(json.loads(p.read_text()))
    assert np.array_equal(back.matrix, T.matrix)
    assert back.to_json()["header"] == {"n": 2, "N": 2, "order": "lex"}
    with pytest.raises(ValidationError):
        TruncatedOperator(TH, 2, np.eye(3))


def test_quantize_reports_failing_lattice_point():
    sym = S.ClassicalSymbol(TH, [S.HomogeneousSymbol(S.inverse(S.norm_sq(2)), -2)], cutoff=None)
    with pytest.raises(Exception) as info:
        quantize(sym, 2)
    assert "(0, 0)" in str(info.value)
