import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lattice_pdo.expr import (
    BinOp,
    Expi,
    KVar,
    Lam,
    Num,
    Pow,
    SymbolSyntaxError,
    evaluate,
    parse_symbol,
    to_text,
)
from lattice_pdo.weights import make_standard_weight

LAM = make_standard_weight(1)


def test_parse_tree_shape():
    tree = parse_symbol("pow(Lambda,-0.5)/k[1]").tree
    assert tree == BinOp("/", Pow(Lam(), -0.5), KVar(1))
    assert parse_symbol("expi(1, -2)", 2).tree == Expi((1, -2))
    assert parse_symbol("-3").tree == Num(-3.0)


def test_precedence_and_canonical_text():
    expr = parse_symbol("1+2*3-(4-5)")
    assert to_text(expr.tree) == "1 + 2 * 3 - (4 - 5)"
    k = np.zeros((1, 1))
    assert evaluate(expr, k, k, LAM) == 8


def test_evaluation_on_grid():
    k = np.array([[0, 1, 2]])
    x = np.array([[0.0, 0.25, 0.5]])
    out = evaluate(parse_symbol("Lambda + 0.5*expi(1)", 1), k, x, LAM)
    expected = np.sqrt(1 + k[0] ** 2) + 0.5 * np.exp(2j * np.pi * x[0])
    np.testing.assert_allclose(out, expected)
    np.testing.assert_allclose(evaluate(parse_symbol("cos(x[1])*k[1]"), k, x, LAM), np.cos(x[0]) * k[0])


@pytest.mark.parametrize(
    "text, n, line, col",
    [
        ("1 +", None, 1, 4),
        ("k[2]", 1, 1, 3),
        ("expi(1, 0)", 1, 1, 1),
        ("foo(1)", None, 1, 1),
        ("1.2.3", None, 1, 1),
        ("pow(Lambda)", None, 1, 11),
        ("1 +\n  $", None, 2, 3),
        ("expi(0.5)", 1, 1, 6),
    ],
)
def test_syntax_errors_carry_positions(text, n, line, col):
    with pytest.raises(SymbolSyntaxError) as err:
        parse_symbol(text, n)
    assert (err.value.line, err.value.column) == (line, col)


leaf = st.one_of(
    st.integers(-9, 9).map(lambda v: Num(float(v))),
    st.just(Lam()),
    st.just(KVar(1)),
    st.integers(-3, 3).map(lambda c: Expi((c,))),
)
trees = st.recursive(
    leaf,
    lambda kids: st.one_of(
        st.tuples(st.sampled_from("+-*/"), kids, kids).map(lambda t: BinOp(*t)),
        st.tuples(kids, st.sampled_from([-1.0, 0.5, 2.0])).map(lambda t: Pow(*t)),
    ),
    max_leaves=8,
)


@settings(max_examples=200)
@given(tree=trees)
def test_print_parse_round_trip(tree):
    assert parse_symbol(to_text(tree), 1).tree == tree
