import math
import sys

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from regcalc.expr import (
    Add,
    Const,
    Div,
    EvalDomainError,
    ExprSyntaxError,
    Func,
    Mul,
    Neg,
    NotDifferentiable,
    Num,
    Pow,
    Sub,
    UnboundIndex,
    UnknownIdentifier,
    Var,
    compile_expr,
    diff,
    evaluate,
    evaluate_array,
    fold_constants,
    parse,
    simplify,
    substitute,
    to_text,
)

SMOOTH = ("sin", "cos", "exp", "sqrt", "cbrt", "ln")

leaves = st.one_of(
    st.just(Var("x")),
    st.floats(-5, 5, allow_nan=False).map(lambda v: Num(round(v, 3))),
    st.sampled_from([Const("pi"), Const("e")]),
)


def _extend(children):
    return st.one_of(
        st.builds(Func, st.sampled_from(SMOOTH + ("abs",)), children),
        st.builds(Neg, children),
        st.builds(Pow, children, st.integers(0, 3).map(lambda k: Num(k))),
        st.builds(Pow, children, children),
        *[st.builds(op, children, children) for op in (Add, Sub, Mul, Div)],
    )


trees = st.recursive(leaves, _extend, max_leaves=12)


@given(trees)
@settings(max_examples=500)
def test_print_then_parse_is_identity(e):
    assert parse(to_text(e)) == e


# |x| >= 1e-3 keeps removable 0/0 points such as x/x out of the stencil
away_from_zero = st.floats(1e-3, 3).flatmap(lambda v: st.sampled_from([v, -v]))


@given(trees, away_from_zero)
@settings(max_examples=500)
def test_derivative_matches_central_difference(e, x):
    h = 1e-5
    try:
        d = evaluate(diff(e), x)
        fd = (evaluate(e, x + h) - evaluate(e, x - h)) / (2 * h)
        fd_half = (evaluate(e, x + h / 2) - evaluate(e, x - h / 2)) / h
        fx = evaluate(e, x)
    except (NotDifferentiable, EvalDomainError, OverflowError, ValueError):
        assume(False)
    assume(all(map(math.isfinite, (d, fd, fd_half, fx))))
    # rounding in f(x ± h) swamps the quotient when |f(x)| is huge next to h
    assume(abs(fx) * sys.float_info.epsilon / h <= 1e-7)
    # a singularity inside the stencil shows up as two step sizes disagreeing
    assume(abs(fd - fd_half) <= 1e-6 * (1 + abs(fd)))
    assert abs(d - fd) <= 1e-5 * (1 + abs(d))


@given(trees, st.floats(-3, 3))
@settings(max_examples=300)
def test_simplify_preserves_value(e, x):
    try:
        want = evaluate(e, x)
    except (EvalDomainError, OverflowError, ValueError):
        assume(False)
    assume(math.isfinite(want))
    got = evaluate(simplify(e), x)
    assert got == pytest.approx(want, rel=1e-9, abs=1e-12)


def _scalar(e, x):
    try:
        return evaluate(e, x)
    except (EvalDomainError, OverflowError, ValueError):
        return None


@given(trees)
@settings(max_examples=200)
def test_vector_evaluation_agrees_with_scalar(e):
    xs = np.linspace(-2.5, 2.5, 11)
    scalars = [_scalar(e, float(x)) for x in xs]
    try:
        with np.errstate(all="ignore"):
            vec = evaluate_array(e, xs)
    except EvalDomainError:
        # the vector path refuses the whole batch only when some point is out of domain
        assert any(s is None for s in scalars)
        return
    for v, s in zip(vec, scalars):
        if s is not None and math.isfinite(s):
            assert v == pytest.approx(s, rel=1e-12, abs=1e-12)


def test_precedence():
    assert evaluate("-2^2") == -4
    assert evaluate("(-2)^2") == 4
    assert evaluate("2^3^2") == 512
    assert evaluate("8/4/2") == 1
    assert evaluate("2^-1") == 0.5
    assert evaluate("1 - 2 - 3") == -4


def test_negative_literal_and_negation_stay_distinct():
    assert parse("(-1.5)") == Num(-1.5)
    assert parse("-1.5") == Neg(Num(1.5))
    assert parse(to_text(Neg(Num(1.5)))) == Neg(Num(1.5))
    assert parse(to_text(Pow(Neg(Num(2.0)), Num(2.0)))) == Pow(Neg(Num(2.0)), Num(2.0))


def test_constants_and_index():
    assert evaluate("pi") == math.pi
    assert evaluate("e") == math.e
    assert evaluate("x + n", 1.5, 2) == 3.5
    with pytest.raises(UnboundIndex):
        evaluate("n", 1.0)


def test_cbrt_is_real_for_negative_arguments():
    assert evaluate("cbrt(x)", -8.0) == pytest.approx(-2.0)


@pytest.mark.parametrize(
    "text, x",
    [("ln(x)", 0.0), ("ln(x)", -1.0), ("1/x", 0.0), ("sqrt(x)", -1.0), ("x^0.5", -4.0)],
)
def test_domain_errors_name_the_node(text, x):
    with pytest.raises(EvalDomainError) as info:
        evaluate(text, x)
    assert info.value.node is not None


def test_syntax_errors_carry_offset_and_expectations():
    with pytest.raises(ExprSyntaxError) as info:
        parse("1 + * 2")
    assert info.value.offset == 4
    assert "x" in info.value.expected
    with pytest.raises(UnknownIdentifier) as info:
        parse("1 + foo(x)")
    assert info.value.offset == 4 and info.value.name == "foo"
    with pytest.raises(ExprSyntaxError):
        parse("(x + 1")
    with pytest.raises(ExprSyntaxError):
        parse("x x")


def test_utf8_offsets_are_bytes():
    with pytest.raises(ExprSyntaxError) as info:
        parse("x + é")
    assert info.value.offset == 4


def test_abs_is_not_formally_differentiable():
    with pytest.raises(NotDifferentiable):
        diff("abs(x)")
    # abs of a constant is fine
    assert evaluate(diff("abs(2) * x"), 0.3) == 2


@pytest.mark.parametrize(
    "text, x, want",
    [
        ("x^3", 2.0, 12.0),
        ("sin(x)", 0.0, 1.0),
        ("exp(2*x)", 0.0, 2.0),
        ("ln(x)", 4.0, 0.25),
        ("sqrt(x)", 4.0, 0.25),
        ("cbrt(x)", 8.0, 1.0 / 12.0),
        ("2^x", 1.0, 2.0 * math.log(2.0)),
        ("x^x", 1.0, 1.0),
        ("1/x", 2.0, -0.25),
        ("x + n", 0.0, 1.0),
    ],
)
def test_known_derivatives(text, x, want):
    assert evaluate(diff(text), x, 3) == pytest.approx(want)


def test_constant_folding():
    assert fold_constants(parse("2*3 + x")) == parse("6 + x")
    assert simplify(parse("0*x + 1*(x + 0)")) == Var("x")


def test_substitute():
    e = substitute(parse("x^2 + n"), x=parse("x + 1"), n=Num(2))
    assert evaluate(e, 1.0) == 6.0


def test_compiled_matches_evaluate():
    e = parse("sin(x) * exp(-x) + n / (1 + x^2)")
    fn = compile_expr(e)
    for x in (-1.0, 0.0, 0.7, 3.0):
        assert fn(x, 2) == evaluate(e, x, 2)
