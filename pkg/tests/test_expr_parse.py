from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from examforge.errors import ExprSyntaxError
from examforge.expr import parse_expr, to_source
from examforge.expr.syntax import (
    BinOp,
    BoolLit,
    Call,
    Compare,
    Logic,
    Name,
    Neg,
    Not,
    Num,
    Str,
    free_names,
)


def n(x):
    return Num(Fraction(x))


def test_joint_pdf_normaliser_shape():
    e = parse_expr("6 / (2*v1*v3^3*v4 + 3*v2*v4^2*v3)")
    left = BinOp("*", BinOp("*", BinOp("*", n(2), Name("v1")), BinOp("^", Name("v3"), n(3))), Name("v4"))
    right = BinOp("*", BinOp("*", BinOp("*", n(3), Name("v2")), BinOp("^", Name("v4"), n(2))), Name("v3"))
    assert e == BinOp("/", n(6), BinOp("+", left, right))


def test_unary_minus_binds_looser_than_power():
    assert parse_expr("-x^2") == Neg(BinOp("^", Name("x"), n(2)))


def test_power_is_right_associative():
    assert parse_expr("2^3^2") == BinOp("^", n(2), BinOp("^", n(3), n(2)))


def test_negative_exponent():
    assert parse_expr("2^-1") == BinOp("^", n(2), Neg(n(1)))


def test_boolean_precedence():
    e = parse_expr("not a < b and c == d or e")
    assert e == Logic(
        "or",
        Logic("and", Not(Compare("<", Name("a"), Name("b"))), Compare("==", Name("c"), Name("d"))),
        Name("e"),
    )


def test_decimal_literal_is_exact():
    assert parse_expr("0.45") == Num(Fraction(9, 20))


def test_string_and_bool_literals():
    assert parse_expr('name == "Bob \\"B\\""') == Compare("==", Name("name"), Str('Bob "B"'))
    assert parse_expr("true or false") == Logic("or", BoolLit(True), BoolLit(False))


def test_chained_comparison_rejected():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("1 < 2 < 3")
    assert info.value.pos == 6


@pytest.mark.parametrize(
    "source, fragment",
    [
        ("a = 1", "=="),
        ("a $ 1", "unexpected character"),
        ("foo(1)", "unknown function 'foo'"),
        ("min(1)", "at least 2"),
        ("sqrt(1, 2)", "takes 1"),
        ("(a + 1", "expected ')'"),
        ("a +", "found end of input"),
        ('"open', "unterminated"),
        ("a b", "expected operator"),
    ],
)
def test_syntax_errors(source, fragment):
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr(source)
    assert fragment in str(info.value)


def test_free_names():
    assert free_names(parse_expr("bitor(n, shr(n, s)) + max(a, 1, b)")) == {"n", "s", "a", "b"}


# -- print/parse identity -----------------------------------------------------

decimals = st.builds(
    lambda k, e: Num(Fraction(k, 10 ** e)), st.integers(0, 10**6), st.integers(0, 4)
)
leaves = st.one_of(
    decimals,
    st.sampled_from([Name("a"), Name("b2"), Name("_x")]),
    st.sampled_from([BoolLit(True), BoolLit(False)]),
    st.text(alphabet='ab"\\ ', max_size=4).map(Str),
)


def _extend(children):
    return st.one_of(
        st.builds(Neg, children),
        st.builds(Not, children),
        st.builds(BinOp, st.sampled_from("+-*/^"), children, children),
        st.builds(Compare, st.sampled_from(["<", "<=", ">", ">=", "==", "!="]), children, children),
        st.builds(Logic, st.sampled_from(["and", "or"]), children, children),
        st.builds(lambda a: Call("floor", (a,)), children),
        st.builds(lambda a, b, c: Call("max", (a, b, c)), children, children, children),
        st.builds(lambda a, b: Call("wrap", (a, b)), children, children),
    )


asts = st.recursive(leaves, _extend, max_leaves=12)


@given(asts)
def test_print_parse_identity(tree):
    assert parse_expr(to_source(tree)) == tree
