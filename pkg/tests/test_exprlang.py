import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from coverembed import exprlang as el
from coverembed.errors import ArityError, ExprEvaluationError, ExprSyntaxError, UnknownIdentifierError


def test_product_node_and_value():
    e = el.parse("2*pi*x1", 2)
    assert isinstance(e, el.BinOp) and e.op == "*"
    assert el.evaluate(e, [0.5, 0.0]) == pytest.approx(math.pi, abs=1e-15)


def test_pythagorean_identity_everywhere():
    e = el.parse("sin(2*pi*x1)^2 + cos(2*pi*x1)^2", 2)
    X = np.random.default_rng(3).uniform(-4, 4, (200, 2))
    assert np.max(np.abs(el.evaluate(e, X) - 1.0)) <= 1e-15 * 2


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError, match="unknown identifier") as exc:
        el.parse("x3", 2)
    assert exc.value.position == 0


def test_syntax_errors_carry_positions():
    with pytest.raises(ExprSyntaxError) as exc:
        el.parse("sin(x1", 1)
    assert exc.value.position == 6
    with pytest.raises(ExprSyntaxError, match="unexpected character"):
        el.parse("x1 $ 2", 1)
    with pytest.raises(ExprSyntaxError, match="empty"):
        el.parse("  ", 1)


def test_arity():
    with pytest.raises(ArityError):
        el.parse("pow(x1)", 1)
    with pytest.raises(UnknownIdentifierError, match="unknown function"):
        el.parse("tan(x1)", 1)


def test_exp_literal():
    assert el.evaluate(el.parse("exp(0.6)", 1), [0.0]) == pytest.approx(math.exp(0.6), rel=1e-15)


def test_division_by_zero_names_subexpression():
    with pytest.raises(ExprEvaluationError, match="division by zero") as exc:
        el.evaluate(el.parse("1 + 1/x1", 1), [0.0])
    assert "1/x1" in str(exc.value)


@pytest.mark.parametrize("text", ["log(x1 - 1)", "sqrt(-1 - x1^2)", "pow(x1, 0.5)"])
def test_domain_errors(text):
    with pytest.raises(ExprEvaluationError):
        el.evaluate(el.parse(text, 1), np.array([[-3.0], [0.5]]))


def test_pow_of_negative_integer_exponent():
    assert el.evaluate(el.parse("pow(x1,2)", 1), [-3.0]) == 9.0


def test_precedence_rules():
    # unary minus binds tighter than ^, and ^ is left-associative
    assert el.evaluate(el.parse("-x1^2", 1), [3.0]) == 9.0
    assert el.evaluate(el.parse("2^3^2", 1), [0.0]) == 64.0
    assert el.evaluate(el.parse("8 - 4 - 2", 1), [0.0]) == 2.0
    assert el.evaluate(el.parse("8/4/2", 1), [0.0]) == 1.0
    assert el.parse("-2", 1) == el.Num(-2.0)


def test_derivative_of_sine():
    d = el.differentiate(el.parse("sin(2*pi*x1)", 1), 1)
    assert el.evaluate(d, [0.0]) == pytest.approx(2 * math.pi, rel=1e-15)
    expected = el.parse("2*pi*cos(2*pi*x1)", 1)
    X = np.linspace(-1, 1, 41)[:, None]
    assert np.allclose(el.evaluate(d, X), el.evaluate(expected, X), rtol=0, atol=1e-13)


def test_derivative_of_constant_is_zero():
    assert el.differentiate(el.parse("x1", 2), 2) == el.Num(0.0)


def test_chain_rule_vanishes_at_quarter():
    d = el.differentiate(el.parse("exp(0.3*sin(2*pi*x1))", 1), 1)
    assert abs(el.evaluate(d, [0.25])) < 1e-14


def test_batch_shapes():
    e = el.parse("x1 + x2", 2)
    assert el.evaluate(e, np.zeros((4, 3, 2))).shape == (4, 3)
    assert el.evaluate(el.parse("pi", 2), np.zeros((5, 2))).shape == (5,)


def test_variables():
    assert el.variables(el.parse("sin(x1) + pow(x3, 2)", 3)) == {1, 3}


# --------------------------------------------------------------------------
# generated corpus

_leaf = st.one_of(
    st.sampled_from(["x1", "x2", "pi"]),
    st.integers(0, 9).map(str),
    st.sampled_from(["0.5", "1.25", "0.3"]),
)


def _grow(sub):
    return st.one_of(
        st.tuples(sub, st.sampled_from(["+", "-", "*"]), sub).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(sub, sub).map(lambda t: f"{t[0]} / (2 + cos({t[1]}))"),
        st.tuples(sub, st.sampled_from(["2", "3"])).map(lambda t: f"({t[0]})^{t[1]}"),
        st.tuples(st.sampled_from(["sin", "cos"]), sub).map(lambda t: f"{t[0]}({t[1]})"),
        sub.map(lambda s: f"exp(0.5*sin({s}))"),
        sub.map(lambda s: f"-{s}"),
        sub.map(lambda s: f"sqrt(1 + ({s})^2)"),
        sub.map(lambda s: f"log(2 + sin({s}))"),
        st.tuples(sub, sub).map(lambda t: f"{t[0]} - {t[1]} - 1"),
    )


expressions = st.recursive(_leaf, _grow, max_leaves=8)
points = st.tuples(st.floats(-1, 1), st.floats(-1, 1))


@settings(max_examples=100, deadline=None)
@given(expressions, points, st.sampled_from([1, 2]))
def test_derivative_matches_central_difference(text, x, i):
    e = el.parse(text, 2)
    d = el.differentiate(e, i)
    x = np.array(x)
    h = 1e-6
    step = np.zeros(2)
    step[i - 1] = h
    fd = (el.evaluate(e, x + step) - el.evaluate(e, x - step)) / (2 * h)
    value = el.evaluate(d, x)
    assume(np.isfinite(value) and np.isfinite(fd))
    assert abs(value - fd) < 1e-5 * (1 + abs(value))


@settings(max_examples=100, deadline=None)
@given(expressions)
def test_print_parse_round_trip(text):
    e = el.parse(text, 2)
    assert el.parse(el.to_text(e), 2) == e


@settings(max_examples=50, deadline=None)
@given(expressions, points)
def test_printed_text_evaluates_identically(text, x):
    e = el.parse(text, 2)
    again = el.parse(el.to_text(e), 2)
    assert el.evaluate(again, x) == el.evaluate(e, x)
