import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

import oracles
from fraclie import expr as ex
from fraclie.fracops import TimeGrid
from fraclie.groups import (
    GROUP_NAMES,
    GroupDomainError,
    GroupElement,
    HeatConditionError,
    Solution,
    apply_point,
    catalog,
    check_heat_solution,
    classical_form,
    cole_hopf_residual,
    flow,
    get_solution,
    iterate_transform,
    residual_alpha_time,
    residual_direct,
    seed_constant,
    specialize_alpha,
    superpose,
    transform_solution,
)
from fraclie.symmetry import basis

X = np.linspace(0, 2, 50)
T = np.linspace(0.1, 2, 50)
POINTS = st.tuples(st.floats(0, 2), st.floats(0.1, 2), st.floats(-1, 1))


def test_concrete_images():
    assert apply_point(GroupElement("g1", 2.0), (1, 1, 0)) == (3, 1, 0)
    img = apply_point(GroupElement("g4", math.log(2)), (1, 1, 0))
    assert img == pytest.approx((2, 4, 0), abs=1e-14)
    img = apply_point(GroupElement("g6", 0.1), (1, 1, 0))
    assert img == pytest.approx((5 / 3, 5 / 3, -1 / 6 + 0.5 * math.log(0.6)), abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(GROUP_NAMES[:6]), st.floats(-0.1, 0.1), POINTS)
def test_closed_forms_match_oracle(name, eps, p):
    assert apply_point(GroupElement(name, eps), p) == pytest.approx(oracles.group_image(name, eps, *p), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(GROUP_NAMES[:6]), st.floats(-0.05, 0.05), st.floats(-0.05, 0.05), POINTS)
def test_group_law(name, e1, e2, p):
    once = apply_point(GroupElement(name, e1 + e2), p)
    twice = apply_point(GroupElement(name, e2), apply_point(GroupElement(name, e1), p))
    assert once == pytest.approx(twice, abs=1e-10)
    back = apply_point(GroupElement(name, -e1), apply_point(GroupElement(name, e1), p))
    assert back == pytest.approx(p, abs=1e-10)


def test_g6_domain():
    with pytest.raises(GroupDomainError):
        apply_point(GroupElement("g6", 1.0), (0, 1, 0))


def test_flows_match_closed_forms():
    rng = np.random.default_rng(3)
    for i, V in enumerate(basis()):
        g = GroupElement(f"g{i + 1}", 0.1)
        for _ in range(20):
            p = (rng.uniform(0, 2), rng.uniform(0.1, 2), rng.uniform(-1, 1))
            assert flow(V, 0.1, p) == pytest.approx(apply_point(g, p), abs=1e-8)


def test_flow_identity_and_v5():
    V5 = basis()[4]
    for V in basis():
        assert flow(V, 0.0, (0.3, 0.7, 0.1)) == (0.3, 0.7, 0.1)
    x0, T0, u0, e = 0.4, 1.2, -0.3, 0.7
    assert flow(V5, e, (x0, T0, u0)) == pytest.approx((x0 + 2 * e * T0, T0, u0 - x0 * e - e * e * T0), abs=1e-10)


def test_flow_blow_up_is_reported():
    with pytest.raises(GroupDomainError):
        flow(basis()[5], 1.0, (1.0, 1.0, 0.0))


def _close(a: ex.Expr, b: ex.Expr, **fixed):
    rng = np.random.default_rng(9)
    bind = {"x": rng.uniform(0, 2, 50), "T": rng.uniform(0.1, 2, 50), "eps": rng.uniform(0, 0.2, 50),
            "c": rng.uniform(-1, 1, 50)}
    bind.update(fixed)
    return np.allclose(ex.evaluate(a, bind), ex.evaluate(b, bind), atol=1e-12, rtol=0)


def test_transforms_of_constant_seed():
    c = seed_constant()
    assert _close(transform_solution(GroupElement("g3"), c).expr, ex.parse("c + eps"))
    assert _close(transform_solution(GroupElement("g5"), c).expr, get_solution("u5_1").expr)
    assert _close(transform_solution(GroupElement("g6"), c).expr, get_solution("u6_1").expr)


def test_iterations():
    c = seed_constant()
    assert iterate_transform(GroupElement("g5"), c, 0) == c
    assert _close(iterate_transform(GroupElement("g5"), c, 2).expr, get_solution("u5_2").expr)
    assert _close(iterate_transform(GroupElement("g6"), c, 2).expr, get_solution("u6_2").expr)


@pytest.mark.parametrize("name", GROUP_NAMES[:6])
def test_transforms_preserve_solutions(name):
    f = get_solution("u6_1")
    g = transform_solution(GroupElement(name, 0.05), f)
    assert residual_alpha_time(g, X, T, eps=0.1).max_abs <= 1e-10


def test_superposition():
    c = seed_constant()
    one = superpose(c, "1", 0.5)
    assert residual_alpha_time(one, X, T).max_abs == 0.0
    lin = superpose(c, "x", 0.5)
    assert _close(lin.expr, ex.parse("log(exp(c) + 0.5*x)"))
    assert residual_alpha_time(lin, X, T).max_abs <= 1e-12
    with pytest.raises(HeatConditionError):
        superpose(c, "T", 0.5)
    check_heat_solution(ex.parse("exp(x + T)"))
    with pytest.raises(HeatConditionError):
        check_heat_solution(ex.parse("exp(x - T)"))


def test_catalog_solutions():
    assert [s.name for s in catalog()] == ["u5_1", "u5_2", "u6_1", "u6_2"]
    assert get_solution("u5_1").text() == "c + eps^2*T - x*eps"
    for s in catalog():
        eps = s.defaults["eps"]
        assert residual_alpha_time(s, X, T, eps=eps).max_abs <= 1e-10
        assert cole_hopf_residual(s, X, T, eps=eps).max_abs <= 1e-10
        assert s.iterations == len(s.transforms)
    with pytest.raises(KeyError):
        get_solution("u7")


def test_alpha_one_reduction():
    rng = np.random.default_rng(4)
    b = {"x": rng.uniform(0, 2, 40), "t": rng.uniform(0.05, 2, 40), "eps": rng.uniform(0, 0.2, 40),
         "c": rng.uniform(-1, 1, 40)}
    for s in catalog():
        assert np.allclose(ex.evaluate(specialize_alpha(s, 1.0), b), ex.evaluate(classical_form(s.name), b),
                           atol=1e-12, rtol=0)


def test_residual_of_non_solution():
    r = residual_alpha_time(Solution(ex.parse("x^2")), X, T)
    assert r.max_abs == pytest.approx(18.0)
    assert residual_alpha_time(seed_constant(), X, T).max_abs == 0.0


def test_solution_rejects_foreign_variables():
    with pytest.raises(ValueError):
        Solution(ex.parse("x + y"))


def test_direct_residuals():
    x = np.linspace(0, 2, 20)
    r1 = residual_direct(get_solution("u5_1"), 0.5, x, TimeGrid(1.0, 256), eps=1.0)
    r2 = residual_direct(get_solution("u5_1"), 0.5, x, TimeGrid(1.0, 512), eps=1.0)
    assert r2.max_abs < r1.max_abs <= 5e-3
    assert np.isnan(r1.residual[:, 0]).all()
    assert r1.max_abs_all_nodes > r1.max_abs


def test_u6_defect_matches_quadrature_oracle():
    alpha, eps, x = 0.5, 0.1, 1.0
    g = math.gamma(1 + alpha)

    def u_T_of_s(s):
        return oracles.u6_1_T(x, s**alpha / g, eps)

    # D_t^alpha u(1) = 1/Gamma(1-alpha) int_0^1 (1-s)^-alpha u_T(T(s)) alpha s^(alpha-1)/Gamma(1+alpha) ds
    val, _ = integrate.quad(u_T_of_s, 0, 1, weight="alg", wvar=(alpha - 1, -alpha))
    D = val * alpha / g / math.gamma(1 - alpha)
    Tt = 1 / g
    d = 1 + 4 * eps * Tt
    u_x, u_xx = -2 * eps * x / d, -2 * eps / d
    exact = D - u_xx - u_x**2
    r = residual_direct(get_solution("u6_1"), alpha, [x], TimeGrid(1.0, 1024), eps=eps).at(x, 1.0)
    assert r == pytest.approx(exact, abs=2e-4)
    assert abs(exact) >= 1e-3


def test_residual_csv(tmp_path):
    r = residual_alpha_time(get_solution("u5_1"), [0, 1], [0.1, 0.2])
    r.write_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "x,t_or_T,residual" and len(lines) == 5
