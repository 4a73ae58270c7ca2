import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eulercert.expressions import (
    EvalDomainError,
    Jet2,
    ParseError,
    UnknownIdentifierError,
    eval_jet,
    eval_real,
    format_expr,
    parse,
)


def jet_at(text, x, params=None, var="x"):
    return eval_jet(parse(text, var), Jet2.variable(x), params)


class TestParsing:
    def test_depth_of_nested_rational(self):
        ast = parse("1/(1+x^2)^2", "x")
        assert ast.depth() == 5

    def test_paper_profile_parses(self):
        ast = parse("-1/r^2 + 1/(1+r^2)^2", "r")
        assert ast.param_names() == frozenset()

    def test_unbalanced_paren_reports_position(self):
        with pytest.raises(ParseError) as err:
            parse("1/(", "x")
        assert err.value.position == 3

    def test_empty_expression_rejected(self):
        with pytest.raises(ParseError):
            parse("   ", "x")

    def test_unknown_function_rejected_at_parse(self):
        with pytest.raises(ParseError, match="unknown function"):
            parse("foo(x)", "x")

    def test_unknown_identifier_recorded_not_rejected(self):
        ast = parse("a*x + b", "x")
        assert ast.param_names() == frozenset({"a", "b"})

    def test_scientific_notation(self):
        assert eval_real(parse("1.5e-3 + 2E2", "x"), 0.0) == pytest.approx(200.0015)

    def test_whitespace_insensitive(self):
        a = parse("1 +  2 * x", "x")
        b = parse("1+2*x", "x")
        assert eval_real(a, 3.0) == eval_real(b, 3.0)

    def test_depth_cap(self):
        deep = "(" * 300 + "x" + ")" * 300
        with pytest.raises(ParseError, match="deeply nested"):
            parse(deep, "x")

    def test_stray_character(self):
        with pytest.raises(ParseError):
            parse("x $ 2", "x")

    def test_trailing_garbage(self):
        with pytest.raises(ParseError):
            parse("x + 1 )", "x")


class TestPrecedence:
    @pytest.mark.parametrize(
        "text,x,expected",
        [
            ("-x^2", 2.0, -4.0),  # unary minus binds below ^
            ("2^-2", 0.0, 0.25),  # signed exponent
            ("2^3^2", 0.0, 512.0),  # right associative
            ("6/3/2", 0.0, 1.0),  # left associative
            ("1+2*3^2", 0.0, 19.0),
            ("-2-3", 0.0, -5.0),
            ("2*-3", 0.0, -6.0),
        ],
    )
    def test_value(self, text, x, expected):
        assert eval_real(parse(text, "x"), x) == expected


class TestJetEvaluation:
    def test_exp_at_zero(self):
        j = jet_at("exp(x)", 0.0)
        assert (j.value, j.d1, j.d2) == (1.0, 1.0, 1.0)

    def test_square_at_three(self):
        j = jet_at("x^2", 3.0)
        assert (j.value, j.d1, j.d2) == (9.0, 6.0, 2.0)

    def test_bump_profile_at_one(self):
        j = jet_at("1/(1+x^2)^2", 1.0)
        assert j.value == 0.25
        assert j.d1 == -0.5
        # second derivative against a central second difference
        f = lambda x: 1.0 / (1.0 + x * x) ** 2
        h = 1e-5
        fd2 = (f(1.0 + h) - 2.0 * f(1.0) + f(1.0 - h)) / h**2
        assert abs(j.d2 - fd2) <= 1e-3 * (1.0 + abs(j.d2))
        assert j.d2 == pytest.approx(1.0, abs=1e-12)

    def test_parameters_resolve(self):
        assert eval_real(parse("1/(T-x)", "x"), 1.0, {"T": 2.0}) == 1.0

    def test_time_variable(self):
        assert eval_real(parse("t", "t"), 1.0) == 1.0

    def test_pole_is_domain_error(self):
        with pytest.raises(EvalDomainError, match="division by zero"):
            eval_real(parse("1/(T-x)", "x"), 1.0, {"T": 1.0})

    def test_missing_parameter_is_error(self):
        with pytest.raises(UnknownIdentifierError, match="'a'"):
            eval_real(parse("a*x", "x"), 1.0)

    @pytest.mark.parametrize("text", ["ln(x)", "sqrt(x)"])
    def test_positive_domain_enforced(self, text):
        with pytest.raises(EvalDomainError):
            jet_at(text, -1.0)

    def test_fractional_power_of_negative_rejected(self):
        with pytest.raises(EvalDomainError, match="a > 0"):
            jet_at("x^0.5", -2.0)

    def test_integer_power_of_negative_ok(self):
        j = jet_at("x^3", -2.0)
        assert (j.value, j.d1, j.d2) == (-8.0, 12.0, -12.0)

    def test_negative_integer_power(self):
        j = jet_at("x^-2", 2.0)
        assert j.value == 0.25
        assert j.d1 == -0.25  # -2 x^-3
        assert j.d2 == pytest.approx(0.375)  # 6 x^-4

    def test_batched_evaluation_matches_scalar(self):
        ast = parse("sin(x)/(1+x^2)", "x")
        xs = np.array([0.3, 1.7, -2.2])
        batched = eval_jet(ast, Jet2.variable(xs))
        for i, x in enumerate(xs):
            single = eval_jet(ast, Jet2.variable(float(x)))
            assert batched.value[i] == single.value
            assert batched.d1[i] == single.d1
            assert batched.d2[i] == single.d2


# Expressions used across the finite-difference and round-trip properties.
CORPUS = [
    ("1/(1+x^2)^2", (-3.0, 3.0)),
    ("-1/x^2 + 1/(1+x^2)^2", (0.2, 4.0)),
    ("exp(-x^2)*sin(3*x)", (-2.0, 2.0)),
    ("ln(1 + x^2) + sqrt(2 + x)", (-1.5, 3.0)),
    ("atan(x)/(2 + cos(x))", (-4.0, 4.0)),
    ("x^3 - 2*x + 0.5", (-3.0, 3.0)),
    ("(1 + x/3)^-3", (-2.0, 5.0)),
    ("2^x", (-2.0, 2.0)),
]


def _central_fd(f, x, h):
    d1 = (f(x + h) - f(x - h)) / (2.0 * h)
    d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    return d1, d2


@pytest.mark.parametrize("text,interval", CORPUS)
@pytest.mark.parametrize("h", [1e-4, 1e-5])
def test_jet_derivatives_match_finite_differences(text, interval, h):
    ast = parse(text, "x")
    lo, hi = interval
    for x in np.linspace(lo + 0.05, hi - 0.05, 17):
        jet = eval_jet(ast, Jet2.variable(float(x)))
        f = lambda z: eval_real(ast, float(z))
        fd1, fd2 = _central_fd(f, float(x), h)
        assert abs(jet.d1 - fd1) <= 1e-4 * (1.0 + abs(jet.d1))
        assert abs(jet.d2 - fd2) <= 1e-3 * (1.0 + abs(jet.d2))


@pytest.mark.parametrize("text,interval", CORPUS)
def test_format_parse_round_trip(text, interval):
    ast = parse(text, "x")
    rendered = format_expr(ast)
    ast2 = parse(rendered, "x")
    lo, hi = interval
    rng = np.random.default_rng(0)
    for x in lo + (hi - lo) * rng.random(100):
        j1 = eval_jet(ast, Jet2.variable(float(x)))
        j2 = eval_jet(ast2, Jet2.variable(float(x)))
        assert (j1.value, j1.d1, j1.d2) == (j2.value, j2.d1, j2.d2)


coeffs = st.integers(min_value=-3, max_value=3)


@given(a=coeffs, b=coeffs, c=coeffs, d=coeffs, e=coeffs, x=st.integers(-3, 3))
@settings(max_examples=200, deadline=None)
def test_product_rule_exact_on_polynomials(a, b, c, d, e, x):
    # (a x^2 + b x + c) * (d x + e): integer data keeps every float op exact,
    # so the jet must reproduce the calculus derivatives with zero error.
    p = lambda z: a * z * z + b * z + c
    q = lambda z: d * z + e
    jp = Jet2(float(p(x)), float(2 * a * x + b), float(2 * a))
    jq = Jet2(float(q(x)), float(d), 0.0)
    prod = jp * jq
    assert prod.value == float(p(x) * q(x))
    assert prod.d1 == float(p(x) * d + q(x) * (2 * a * x + b))
    assert prod.d2 == float(2 * a * q(x) + 2 * (2 * a * x + b) * d)


@given(a=coeffs, b=coeffs, x=st.integers(-2, 2))
@settings(max_examples=200, deadline=None)
def test_chain_rule_exact_on_polynomial_powers(a, b, x):
    # ((a x + b)^2)^2 via the power path against the expanded derivatives
    inner = a * x + b
    j = eval_jet(parse("(a*x + b)^4", "x"), Jet2.variable(float(x)),
                 {"a": float(a), "b": float(b)})
    assert j.value == float(inner**4)
    assert j.d1 == float(4 * a * inner**3)
    assert j.d2 == float(12 * a * a * inner**2)
