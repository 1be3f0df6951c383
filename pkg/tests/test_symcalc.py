from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liefinsler.symcalc import (
    DomainError,
    Evaluator,
    IndexRange,
    ParseError,
    SingularMatrixError,
    UnknownIdentifier,
    X,
    Y,
    asarray,
    build,
    const,
    diff_multi,
    differentiate,
    evaluate,
    exp,
    fd_oracle,
    inverse,
    log,
    parse_expr,
    sin,
    sqrt,
    to_string,
)

DIMS = (2, 2)


def p(text):
    return parse_expr(text, DIMS)


# ---- parser -----------------------------------------------------------------


@pytest.mark.parametrize(
    "text, x, y, expected",
    [
        ("1+2*3", (0, 0), (0, 0), 7.0),
        ("2^3^2", (0, 0), (0, 0), 512.0),
        ("-x1^2", (3, 0), (0, 0), -9.0),
        ("(x1+y2)/2", (1, 0), (0, 3), 2.0),
        ("sqrt(y1^2+y2^2)", (0, 0), (3, 4), 5.0),
        ("exp(log(x2))", (0, 2.5), (0, 0), 2.5),
        ("sin(x1)^2+cos(x1)^2", (0.7, 0), (0, 0), 1.0),
        ("1.5e-1*y1", (0, 0), (2, 0), 0.3),
        ("x1 - -x2", (1, 2), (0, 0), 3.0),
    ],
)
def test_parse_and_evaluate(text, x, y, expected):
    assert math.isclose(evaluate(p(text), x, y), expected, rel_tol=1e-14, abs_tol=1e-14)


def test_unknown_identifier_reports_offset():
    with pytest.raises(UnknownIdentifier) as info:
        p("x1 + z3")
    assert info.value.offset == 5


def test_index_out_of_range():
    with pytest.raises(IndexRange):
        p("y3")
    with pytest.raises(IndexRange):
        p("x0")


@pytest.mark.parametrize("text", ["", "1+", "(x1", "x1)", "sin x1", "2**3", "x1 $ 2"])
def test_malformed(text):
    with pytest.raises(ParseError):
        p(text)


def test_offset_is_in_bytes():
    with pytest.raises(ParseError) as info:
        parse_expr("1 + ρ", DIMS)
    assert info.value.offset == 4


def test_hash_consing_shares_nodes():
    assert p("x1*y2 + 1") is p("1 + y2*x1")
    assert X(0) * Y(1) is Y(1) * X(0)


# ---- simplification and derivatives --------------------------------------------


def test_constant_folding_and_zero_rules():
    assert (X(0) * 0).is_zero
    assert X(0) + 0 is X(0)
    assert X(0) * 1 is X(0)
    assert (X(0) - X(0)).is_zero
    assert to_string(const(2) * 3) == "6"


def test_derivatives_of_elementary_functions():
    x = X(0)
    pt = ((0.4, 0.0), (0.0, 0.0))
    cases = [
        (sin(x), math.cos(0.4)),
        (exp(2 * x), 2 * math.exp(0.8)),
        (log(1 + x), 1 / 1.4),
        (sqrt(1 + x * x), 0.4 / math.sqrt(1.16)),
        (x ** 3.5, 3.5 * 0.4 ** 2.5),
        (2 ** x, math.log(2) * 2 ** 0.4),
    ]
    for e, expected in cases:
        assert math.isclose(evaluate(differentiate(e, x), *pt), expected, rel_tol=1e-13)


def test_derivative_is_cached():
    e = p("sin(x1*y1)^3")
    assert differentiate(e, X(0)) is differentiate(e, X(0))


def test_sixth_derivative_closed_form():
    e = p("exp(2*x1)*y1^7")
    d = diff_multi(e, [X(0)] * 3 + [Y(0)] * 3)
    val = evaluate(d, (0.3, 0), (1.2, 0))
    assert math.isclose(val, 8 * math.exp(0.6) * 210 * 1.2 ** 4, rel_tol=1e-13)


def test_fd_oracle_matches_third_order_mixed():
    e = p("sin(x1)*y1^2*y2")
    v = fd_oracle(e, (0.3, 0.0), (0.7, -1.1), [X(0), Y(0), Y(1)])
    assert math.isclose(v, 2 * 0.7 * math.cos(0.3), rel_tol=1e-6)


# ---- evaluation errors ------------------------------------------------------------


def test_domain_errors():
    with pytest.raises(DomainError):
        Evaluator([[0.0, 0.0]], [[0.0, 0.0]])(p("1/x1"))
    with pytest.raises(DomainError):
        Evaluator([[-1.0, 0.0]], [[0.0, 0.0]])(p("log(x1)"))
    with pytest.raises(DomainError):
        Evaluator([[-1.0, 0.0]], [[0.0, 0.0]])(p("sqrt(x1)"))


def test_inverse_and_singularity():
    M = asarray([[p("1+x1^2"), p("y1")], [p("y1"), const(2.0)]])
    Minv = inverse(M)
    ev = Evaluator([[0.5, 0.0], [1.0, 0.0]], [[0.3, 0.0], [-0.2, 0.0]])
    Mv = np.stack([[ev(M[i, j]) for j in range(2)] for i in range(2)]).transpose(2, 0, 1)
    Iv = np.stack([[ev(Minv[i, j]) for j in range(2)] for i in range(2)]).transpose(2, 0, 1)
    assert np.allclose(Mv @ Iv, np.eye(2), atol=1e-14)
    # derivative of the inverse: −M⁻¹ ∂M M⁻¹
    dI = build((2, 2), lambda i, j: differentiate(Minv[i, j], X(0)))
    dM = build((2, 2), lambda i, j: differentiate(M[i, j], X(0)))
    dIv = np.stack([[ev(dI[i, j]) for j in range(2)] for i in range(2)]).transpose(2, 0, 1)
    dMv = np.stack([[ev(dM[i, j]) for j in range(2)] for i in range(2)]).transpose(2, 0, 1)
    assert np.allclose(dIv, -Iv @ dMv @ Iv, atol=1e-13)
    sing = inverse(asarray([[p("y1"), p("y1")], [p("y1"), p("y1")]]))
    with pytest.raises(SingularMatrixError):
        Evaluator([[0.0, 0.0]], [[1.0, 0.0]])(sing[0, 0])


# ---- properties -------------------------------------------------------------------

_leaf = st.sampled_from(["x1", "x2", "y1", "y2", "1", "2", "0.5", "3"])


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(lambda t: f"({t[0]}{t[1]}{t[2]})"),
        st.tuples(st.sampled_from(["sin", "cos", "exp"]), children).map(lambda t: f"{t[0]}({t[1]})"),
        children.map(lambda c: f"({c})^2"),
        children.map(lambda c: f"-{c}"),
    )


exprs = st.recursive(_leaf, _combine, max_leaves=6)
points = st.tuples(*[st.floats(-0.9, 0.9) for _ in range(4)])


@settings(max_examples=60, deadline=None)
@given(exprs, points)
def test_print_parse_roundtrip(text, pt):
    e = p(text)
    again = p(to_string(e))
    x, y = pt[:2], pt[2:]
    a, b = evaluate(e, x, y), evaluate(again, x, y)
    assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


@settings(max_examples=60, deadline=None)
@given(exprs, exprs, points, st.sampled_from([X(0), X(1), Y(0), Y(1)]))
def test_product_rule(t1, t2, pt, v):
    f, g = p(t1), p(t2)
    x, y = pt[:2], pt[2:]
    lhs = evaluate(differentiate(f * g, v), x, y)
    rhs = evaluate(differentiate(f, v) * g + f * differentiate(g, v), x, y)
    assert math.isclose(lhs, rhs, rel_tol=1e-9, abs_tol=1e-9)


@settings(max_examples=40, deadline=None)
@given(exprs, points)
def test_mixed_partials_commute(text, pt):
    f = p(text)
    x, y = pt[:2], pt[2:]
    a = evaluate(diff_multi(f, [X(0), Y(1)]), x, y)
    b = evaluate(diff_multi(f, [Y(1), X(0)]), x, y)
    assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-9)


@settings(max_examples=40, deadline=None)
@given(exprs, points, st.sampled_from([X(0), Y(0), Y(1)]))
def test_first_derivative_matches_finite_difference(text, pt, v):
    f = p(text)
    x, y = pt[:2], pt[2:]
    sym = evaluate(differentiate(f, v), x, y)
    fd = fd_oracle(f, x, y, [v])
    assert abs(sym - fd) <= 1e-5 * max(abs(sym), 1.0)
