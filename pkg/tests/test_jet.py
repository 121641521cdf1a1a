from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclie import expr as ex
from fraclie.jet import (
    ON_SHELL_RULES,
    JetOrderError,
    JetPoly,
    equation_residual,
    on_shell_reduce,
    render,
    total_dT,
    total_dx,
)

X, T, U = JetPoly.var("x"), JetPoly.var("T"), JetPoly.var("u")
UX, UXX, UT = JetPoly.var("u_x"), JetPoly.var("u_xx"), JetPoly.var("u_T")


def P(text: str) -> JetPoly:
    return ex.to_jet_poly(text)


def test_ring_examples():
    assert UX * UX == JetPoly.var("u_x", 2)
    p = P("x*u_x + 3*T^2")
    assert (p + p * -1).is_zero()
    assert JetPoly.exp_u(1) * JetPoly.exp_u(-1) == JetPoly.const(1)


def test_render_is_canonical_and_parseable():
    p = P("u_x^2 + 1/2*x*exp(-u) - u_xx")
    assert render(p) == render(P("-u_xx + x*exp(-u)/2 + u_x^2"))
    assert P(render(p)) == p
    assert render(JetPoly()) == "0"


def test_total_dx_examples():
    assert total_dx(U) == UX
    assert total_dx(X * UX) == UX + X * UXX
    k = P("x^2/2 + T")
    got = total_dx(k * JetPoly.exp_u(-1))
    assert got == (X - k * UX) * JetPoly.exp_u(-1)


def test_total_dT_examples():
    assert total_dT(U) == UT
    assert total_dT(T * T) == 2 * T
    assert total_dT(UX) == JetPoly.var("u_xT")


def test_total_derivative_leaving_the_jet():
    with pytest.raises(JetOrderError):
        total_dx(JetPoly.var("u_xxxx"))
    with pytest.raises(JetOrderError):
        total_dT(JetPoly.var("u_xT"))


def test_on_shell_rules_follow_from_the_equation():
    eq = equation_residual()
    assert on_shell_reduce(eq).is_zero()
    assert on_shell_reduce(total_dx(eq)).is_zero()
    assert on_shell_reduce(total_dT(eq)).is_zero()
    assert on_shell_reduce(total_dx(total_dx(eq))).is_zero()
    rules = dict(ON_SHELL_RULES)
    assert rules["u_TT"] == P("u_xxxx + 4*u_x*u_xxx + 2*u_xx^2 + 4*u_x^2*u_xx")


def test_partial_through_exponential():
    assert JetPoly.exp_u(-2).partial("u") == -2 * JetPoly.exp_u(-2)


# hypothesis strategies over the supported jet
names = ["x", "T", "u", "u_x", "u_T", "u_xx", "u_xT", "u_xxx"]
low_names = ["x", "T", "u", "u_x"]
coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)


def _polys(var_names, allow_exp=True):
    term = st.tuples(
        coeffs,
        st.dictionaries(st.sampled_from(var_names), st.integers(1, 2), max_size=3),
        st.integers(-1, 1) if allow_exp else st.just(0),
    )

    def build(terms):
        out = JetPoly()
        for c, mono, m in terms:
            t = JetPoly.const(c) * JetPoly.exp_u(m)
            for n, e in mono.items():
                t = t * JetPoly.var(n, e)
            out = out + t
        return out

    return st.lists(term, max_size=4).map(build)


polys = _polys(names)
low_polys = _polys(low_names)


@settings(max_examples=150, deadline=None)
@given(polys, polys, polys)
def test_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == JetPoly()


@settings(max_examples=150, deadline=None)
@given(_polys(["x", "T", "u", "u_x", "u_xx"]), _polys(["x", "T", "u", "u_x", "u_xx"]))
def test_total_dx_is_a_derivation(a, b):
    assert total_dx(a * b) == total_dx(a) * b + a * total_dx(b)
    assert total_dx(a + b) == total_dx(a) + total_dx(b)


@settings(max_examples=150, deadline=None)
@given(low_polys)
def test_total_derivatives_commute(p):
    assert total_dx(total_dT(p)) == total_dT(total_dx(p))


@settings(max_examples=150, deadline=None)
@given(_polys(["x", "T", "u", "u_x", "u_T", "u_xx", "u_xT", "u_xxT", "u_xxx"]))
def test_on_shell_is_idempotent(p):
    once = on_shell_reduce(p)
    assert on_shell_reduce(once) == once
    assert not once.variables() & {"u_T", "u_xT", "u_xxT", "u_TT"}


@settings(max_examples=100, deadline=None)
@given(polys, st.floats(-1, 1), st.floats(0.1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_evaluate_matches_expression(p, x, t, u, ux):
    b = {n: 0.3 for n in ("u_T", "u_xx", "u_xT", "u_xxx")}
    b.update(x=x, T=t, u=u, u_x=ux)
    assert p.evaluate(b) == pytest.approx(ex.evaluate(ex.parse(render(p)), b), rel=1e-12, abs=1e-12)


def test_coefficients_are_exact():
    p = JetPoly.const(Fraction(1, 3)) * 3
    assert p.constant_value() == 1
