import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nctorus import symbols as S
from nctorus.algebra import NcElement, ThetaMatrix, adjoint
from nctorus.dsl import ParseError, format_operator, parse_operator, tokenize
from nctorus.quantization import quantize

TH = ThetaMatrix.from_angle(0.25)


def test_laplacian():
    op = parse_operator("d1^2 + d2^2", TH)
    one = NcElement.scalar(TH, 1)
    assert set(op.terms) == {(2, 0), (0, 2)}
    assert all(v == one for v in op.terms.values())
    assert np.array_equal(quantize(op.symbol(), 3).matrix,
                          quantize(S.laplacian_symbol(TH), 3).matrix)


def test_multiplication_operator():
    op = parse_operator("U1 + U1^-1", TH)
    assert op.order == 0
    a = op.terms[(0, 0)]
    assert (adjoint(a) - a).norm0() < 1e-15


def test_leibniz_reordering():
    op = parse_operator("d1*U1", TH)
    ref = parse_operator("U1*d1 + U1", TH)
    assert op.same_normal_form(ref)


def test_precedence():
    a = parse_operator("2*d1^2 + 1", TH)
    assert set(a.terms) == {(2, 0), (0, 0)}
    b = parse_operator("(U1 + 1)^2", TH)
    c = parse_operator("U1^2 + 2*U1 + 1", TH)
    assert b.same_normal_form(c)
    assert parse_operator("-U1^2", TH).same_normal_form(parse_operator("-(U1^2)", TH))


def test_complex_literals():
    op = parse_operator("(1+0.5i)*d1 + 2i + i*U2", TH)
    assert op.terms[(1, 0)].scalar_value() == 1 + 0.5j
    assert op.terms[(0, 0)].to_dict() == {(0, 0): 2j, (0, 1): 1j}


def test_errors_carry_position():
    with pytest.raises(ParseError) as info:
        parse_operator("d1 + * U2", TH)
    assert info.value.position == 5
    with pytest.raises(ParseError):
        parse_operator("d1^-1", TH)
    with pytest.raises(ParseError):
        parse_operator("U3", TH)
    with pytest.raises(ParseError):
        parse_operator("(d1 + d2", TH)
    with pytest.raises(ParseError):
        tokenize("d1 $ d2")


atoms = st.sampled_from(["U1", "U2", "U1^-1", "U2^2", "d1", "d2", "d1^2", "2", "0.5i",
                         "(1+2i)", "i"])


@st.composite
def sources(draw, depth=2):
    if depth == 0:
        return draw(atoms)
    kind = draw(st.sampled_from(["atom", "add", "mul", "pow", "neg"]))
    if kind == "atom":
        return draw(atoms)
    a = draw(sources(depth=depth - 1))
    if kind == "neg":
        return f"-({a})"
    if kind == "pow":
        return f"({a})^{draw(st.integers(0, 2))}"
    b = draw(sources(depth=depth - 1))
    return f"({a}) {'+' if kind == 'add' else '*'} ({b})"


@settings(max_examples=60, deadline=None)
@given(src=sources(), k=st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
def test_normal_form_preserves_action(src, k):
    op = parse_operator(src, TH)
    u = NcElement.monomial(TH, k) + NcElement.monomial(TH, (1, -2), 0.5j)
    assert (op.apply(u) - op.apply_tree(u)).norm0() <= 1e-9 * max(1.0, op.apply(u).norm0())


@settings(max_examples=60, deadline=None)
@given(src=sources())
def test_print_parse_round_trip(src):
    op = parse_operator(src, TH)
    back = parse_operator(format_operator(op), TH)
    assert op.same_normal_form(back)
