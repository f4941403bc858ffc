import math
import random
from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import assume, given, settings, strategies as st

from examforge.errors import EvalError, ExprTypeError
from examforge.expr import evaluate, parse_expr, phi, type_check
from examforge.expr.syntax import BinOp, Call, Neg, Num
from examforge.values import VType

from oracles import joint_pdf_moments, mystery_8bit

C_EXPR = parse_expr("6 / (2*v1*v3^3*v4 + 3*v2*v4^2*v3)")
EY_EXPR = parse_expr("v5 * (v1*v3^3*v4^2/6 + v2*v3*v4^3/3)")


def joint_pdf(v1, v2, v3, v4):
    env = {k: Fraction(v) for k, v in zip(("v1", "v2", "v3", "v4"), (v1, v2, v3, v4))}
    env["v5"] = evaluate(C_EXPR, env)
    return env["v5"], evaluate(EY_EXPR, env)


def test_joint_pdf_reference_binding_is_exact():
    assert joint_pdf(2, 2, 1, 1) == (Fraction(3, 5), Fraction(3, 5))


def test_joint_pdf_reference_binding_matches_quadrature():
    c, ey = joint_pdf_moments(2, 2, 1, 1)
    assert c == pytest.approx(0.6, rel=1e-9)
    assert ey == pytest.approx(0.6, rel=1e-9)


def test_joint_pdf_random_bindings_match_quadrature():
    rng = random.Random(2024)
    for _ in range(20):
        b = (rng.randint(1, 6), rng.randint(1, 6), rng.randint(1, 4), rng.randint(1, 4))
        c, ey = joint_pdf(*b)
        qc, qey = joint_pdf_moments(*b)
        assert float(c) == pytest.approx(qc, rel=1e-9), b
        assert float(ey) == pytest.approx(qey, rel=1e-9), b


def mystery_dsl(n, s1, s2, s3):
    env = {"v1": Fraction(s1), "v2": Fraction(s2), "v3": Fraction(s3), "v4": Fraction(n)}
    steps = [
        ("s1", "bitor(v4, shr(v4, v1))"),
        ("s2", "bitor(s1, shr(s1, v2))"),
        ("s3", "bitor(s2, shr(s2, v3))"),
        ("s4", "wrap(s3 + 1, 8)"),
        ("out", "shr(s4, 1)"),
    ]
    for name, src in steps:
        env[name] = evaluate(parse_expr(src), env)
    return env["out"]


@pytest.mark.parametrize("n, expected", [(88, 64), (150, 0)])
def test_mystery_examples(n, expected):
    assert mystery_8bit(n, 1, 2, 4) == expected
    assert mystery_dsl(n, 1, 2, 4) == expected


def test_mystery_all_shift_triples_and_inputs():
    for s1 in range(1, 5):
        for s2 in range(1, 5):
            for s3 in range(1, 5):
                for n in (88, 150):
                    assert mystery_dsl(n, s1, s2, s3) == mystery_8bit(n, s1, s2, s3)


# -- phi ------------------------------------------------------------------------


def test_phi_at_zero():
    assert phi(0.0) == pytest.approx(0.5, abs=1e-7)
    assert evaluate(parse_expr("phi(0)"), {}) == 0.5


def test_phi_absolute_error_bound():
    mpmath.mp.dps = 50
    worst = 0.0
    for i in range(-2000, 2001):
        x = i / 200
        ref = mpmath.ncdf(mpmath.mpf(x))
        worst = max(worst, abs(float(mpmath.mpf(phi(x)) - ref)))
    assert worst < 1e-15


# -- exactness against an independent rational evaluator ----------------------

small = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def _tree(children):
    return st.one_of(
        st.builds(BinOp, st.sampled_from("+-*/"), children, children),
        st.builds(lambda a, k: BinOp("^", a, Num(Fraction(k))), children, st.integers(-3, 3)),
        st.builds(Neg, children),
        st.builds(lambda f, a: Call(f, (a,)), st.sampled_from(["floor", "ceil", "abs"]), children),
        st.builds(lambda f, a, b: Call(f, (a, b)), st.sampled_from(["min", "max"]), children, children),
    )


rational_asts = st.recursive(small.map(Num), _tree, max_leaves=10)


def reference(e):
    """Evaluate with sympy rationals; raises ZeroDivisionError like integer maths."""
    if isinstance(e, Num):
        return sympy.Rational(e.value.numerator, e.value.denominator)
    if isinstance(e, Neg):
        return -reference(e.operand)
    if isinstance(e, Call):
        args = [reference(a) for a in e.args]
        fn = {"floor": sympy.floor, "ceil": sympy.ceiling, "abs": sympy.Abs,
              "min": sympy.Min, "max": sympy.Max}[e.func]
        return fn(*args)
    a, b = reference(e.left), reference(e.right)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if b == 0 if e.op == "/" else (a == 0 and b < 0):
        raise ZeroDivisionError
    return a / b if e.op == "/" else a ** b


@settings(max_examples=300, deadline=None)
@given(rational_asts)
def test_rational_evaluation_is_exact(tree):
    assert type_check(tree, {}) is VType.RATIONAL
    try:
        expected = reference(tree)
    except ZeroDivisionError:
        with pytest.raises(EvalError):
            evaluate(tree, {})
        return
    assume(abs(expected.p) < 10**200 and expected.q < 10**200)
    got = evaluate(tree, {})
    assert isinstance(got, Fraction)
    assert got == Fraction(int(expected.p), int(expected.q))


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_bit_functions_match_python_ints(a, b):
    env = {"a": Fraction(a), "b": Fraction(b)}
    assert evaluate(parse_expr("bitand(a, b)"), env) == a & b
    assert evaluate(parse_expr("bitor(a, b)"), env) == a | b
    assert evaluate(parse_expr("bitxor(a, b)"), env) == a ^ b


@given(st.integers(-10**9, 10**9), st.integers(1, 64))
def test_wrap_is_modular(a, w):
    got = evaluate(parse_expr("wrap(a, w)"), {"a": Fraction(a), "w": Fraction(w)})
    assert 0 <= got < 2**w and (got - a) % 2**w == 0


# -- errors ---------------------------------------------------------------------


@pytest.mark.parametrize(
    "source, fragment",
    [
        ("1 / (2 - 2)", "division by zero"),
        ("0 ^ -1", "division by zero"),
        ("sqrt(-1)", "sqrt of negative"),
        ("ln(0)", "ln of non-positive"),
        ("shr(-1, 1)", "nonnegative"),
        ("wrap(5, 0)", "width"),
        ("bitand(1/2, 1)", "integer"),
        ("2 ^ 100000", "exceeds"),
        ("exp(1000)", "overflow"),
    ],
)
def test_evaluation_errors(source, fragment):
    with pytest.raises(EvalError) as info:
        evaluate(parse_expr(source), {})
    assert fragment in str(info.value)


def test_short_circuit_skips_division():
    assert evaluate(parse_expr("x != 0 and 1 / x > 2"), {"x": Fraction(0)}) is False
    assert evaluate(parse_expr("x == 0 or 1 / x > 2"), {"x": Fraction(0)}) is True


def test_real_contaminates_and_rational_stays_exact():
    assert evaluate(parse_expr("1/3 + 1/6"), {}) == Fraction(1, 2)
    got = evaluate(parse_expr("sqrt(4) + 1/2"), {})
    assert isinstance(got, float) and got == 2.5
    assert evaluate(parse_expr("floor(sqrt(10))"), {}) == Fraction(3)


def test_mixed_comparison_promotes():
    assert evaluate(parse_expr("sqrt(4) == 2"), {}) is True


def test_text_equality():
    env = {"name": "Alice"}
    assert evaluate(parse_expr('name == "Alice"'), env) is True
    assert evaluate(parse_expr('name != "Bob"'), env) is True


def test_determinism():
    e = parse_expr("phi((200*9/20 - 100*1/5 - 1/2) / sqrt(200*9/20*11/20 + 20*4/5))")
    assert evaluate(e, {}) == evaluate(e, {})
    assert math.isfinite(evaluate(e, {}))


def test_unbound_name():
    with pytest.raises(EvalError):
        evaluate(parse_expr("x + 1"), {})


def test_type_errors_are_not_eval_errors():
    with pytest.raises(ExprTypeError):
        type_check(parse_expr('"a" + 1'), {})
