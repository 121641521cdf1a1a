"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line."""

from __future__ import annotations

import math

import numpy as np
import pytest

import oracles
from fraclie import expr as ex
from fraclie.characteristics import CharSystem, solution_surface, verify_char_solution
from fraclie.fracops import GridFn, TimeGrid, chain_rule_terms, leibniz_terms, mrl_deriv, probe_newton_leibniz
from fraclie.groups import (
    GroupElement,
    apply_point,
    classical_form,
    cole_hopf_residual,
    flow,
    get_solution,
    iterate_transform,
    residual_alpha_time,
    residual_direct,
    seed_constant,
    specialize_alpha,
)
from fraclie.symmetry import (
    HEAT_POLYNOMIALS,
    basis,
    compare_to_published,
    infinitesimal_family,
    jacobi_defect,
    structure_table,
    symmetry_defect,
    vk_field,
)


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


def _points(n: int, seed: int) -> list[tuple[float, float, float]]:
    rng = np.random.default_rng(seed)
    return [(rng.uniform(0, 2), rng.uniform(0.1, 2), rng.uniform(-1, 1)) for _ in range(n)]


def test_criterion_1_symmetries(report):
    good = basis("corrected") + [vk_field(ex.to_jet_poly(k)) for k in HEAT_POLYNOMIALS]
    bad = [
        basis("printed")[3],
        infinitesimal_family(0, 0, 0, 0, 0, 1, sign_variant="plus"),
        vk_field(ex.to_jet_poly("T")),
    ]
    zero = [symmetry_defect(V).is_zero() for V in good]
    nonzero = [not symmetry_defect(V).is_zero() for V in bad]
    report(1, all(zero) and all(nonzero),
           f"{sum(zero)}/{len(good)} symmetries exact, {sum(nonzero)}/{len(bad)} non-symmetries flagged")


def test_criterion_2_lie_algebra(report):
    B = basis()
    table = structure_table(B)
    jacobi = all(
        jacobi_defect(B[i], B[j], B[k]).is_zero()
        for i in range(6) for j in range(i + 1, 6) for k in range(j + 1, 6)
    )
    comp = compare_to_published(table)
    zero_pairs = [(1, 2), (1, 3), (3, 4), (3, 5), (3, 6), (5, 6)]
    zeros_exact = all(p.matches_identity and p.is_zero for p in comp.pairs if p.pair in zero_pairs)
    flipped = all(p.matches_flipped for p in comp.pairs if p.pair not in zero_pairs)
    ok = table.closed and table.antisymmetric and jacobi and zeros_exact and flipped
    report(2, ok, f"closed={table.closed} antisymmetric={table.antisymmetric} jacobi={jacobi} "
                  f"convention={comp.convention}")


def test_criterion_3_flows(report):
    eps = 0.1
    worst = 0.0
    for idx, V in enumerate(basis()):
        g = GroupElement(f"g{idx + 1}", eps)
        for p in _points(20, 100 + idx):
            a = apply_point(g, p)
            b = flow(V, eps, p, 1000)
            worst = max(worst, *(abs(s - t) for s, t in zip(a, b)))
    g6 = apply_point(GroupElement("g6", eps), (1.0, 1.0, 0.0))
    g6_flow = flow(basis()[5], eps, (1.0, 1.0, 0.0), 1000)
    stated = (1.6666667, 1.6666667, -0.4220824)
    flow_err = max(abs(s - t) for s, t in zip(g6, g6_flow))
    # stated values carry seven decimals: compare at that precision
    digits = all(round(v, 7) == s for v, s in zip(g6, stated))
    ok = worst <= 1e-8 and flow_err <= 1e-8 and digits
    report(3, ok, f"max flow-vs-closed-form {worst:.2e}; g6(1,1,0) = "
                  f"({g6[0]:.10f}, {g6[1]:.10f}, {g6[2]:.10f}) vs stated {stated}, flow error {flow_err:.2e}")


def test_criterion_4_alpha_time_residuals(report):
    x, T = np.linspace(0, 2, 50), np.linspace(0.1, 2, 50)
    worst, worst_ch = 0.0, 0.0
    for name, eps in (("u5_1", 1.0), ("u5_2", 1.0), ("u6_1", 0.1), ("u6_2", 0.1)):
        sol = get_solution(name)
        worst = max(worst, residual_alpha_time(sol, x, T, c=0.0, eps=eps).max_abs)
        worst_ch = max(worst_ch, cole_hopf_residual(sol, x, T, c=0.0, eps=eps).max_abs)
    report(4, worst <= 1e-10 and worst_ch <= 1e-10,
           f"max residual {worst:.2e}, max Cole-Hopf residual {worst_ch:.2e}")


def test_criterion_5_iterations(report):
    rng = np.random.default_rng(5)
    n = 100
    x, T, c = rng.uniform(0, 2, n), rng.uniform(0.1, 2, n), rng.uniform(-1, 1, n)
    e5, e6 = rng.uniform(-1, 1, n), rng.uniform(0, 0.2, n)
    it5 = iterate_transform(GroupElement("g5"), seed_constant(), 2)
    it6 = iterate_transform(GroupElement("g6"), seed_constant(), 2)
    d5 = np.max(np.abs(ex.evaluate(it5.expr, {"x": x, "T": T, "c": c, "eps": e5}) - (c - 2 * x * e5 + 4 * e5**2 * T)))
    ref6 = np.array([oracles.u6_2(*args) for args in zip(x, T, e6, c)])
    d6 = np.max(np.abs(ex.evaluate(it6.expr, {"x": x, "T": T, "c": c, "eps": e6}) - ref6))
    t = rng.uniform(0.05, 2, n)
    classical = c - 2 * e6 * x**2 / (1 + 8 * e6 * t) - 0.5 * np.log(1 + 8 * e6 * t)
    red = np.max(np.abs(ex.evaluate(specialize_alpha(get_solution("u6_2"), 1.0),
                                    {"x": x, "t": t, "c": c, "eps": e6}) - classical))
    red_form = np.max(np.abs(ex.evaluate(classical_form("u6_2"), {"x": x, "t": t, "c": c, "eps": e6}) - classical))
    ok = d5 <= 1e-10 and d6 <= 1e-10 and red <= 1e-12 and red_form <= 1e-12
    report(5, ok, f"g5^2 {d5:.2e}, g6^2 {d6:.2e}, alpha=1 reduction {red:.2e}")


def test_criterion_6_quadrature_convergence(report):
    ns = [64, 128, 256, 512, 1024]
    slopes, largest = {}, 0.0
    for alpha in (0.25, 0.5, 0.75):
        coeff = oracles.power_law(alpha, 1.0)
        errs = []
        for n in ns:
            g = TimeGrid(1.0, n)
            D = mrl_deriv(GridFn(g, g.nodes), alpha)
            errs.append(float(np.max(np.abs(D.values - coeff * g.nodes ** (1 - alpha)))))
        largest = max(largest, *errs)
        with np.errstate(divide="ignore"):
            slopes[alpha] = float(np.polyfit(np.log(1.0 / np.array(ns)), np.log(errs), 1)[0])
    g = TimeGrid(1.0, 512)
    value = mrl_deriv(GridFn(g, g.nodes), 0.5).at(1.0)
    slope_ok = all(math.isfinite(s) and abs(s - (2 - a)) <= 0.25 for a, s in slopes.items())
    value_ok = abs(value - 1.1283792) <= 3e-3
    detail = ", ".join(f"alpha={a}: slope {s:.3f} (want {2 - a:.2f})" for a, s in slopes.items())
    # L1 is exact on linear data, so errors sit at rounding level and the fit has no signal
    report(6, slope_ok and value_ok,
           f"f=t {detail}; largest error {largest:.1e}; D^0.5 t at 1 = {value:.7f}")


def test_criterion_7_direct_residuals(report):
    x = np.linspace(0, 2, 50)
    lines, ok = [], True
    for name in ("u5_1", "u5_2"):
        r = [residual_direct(get_solution(name), 0.5, x, TimeGrid(1.0, n), eps=1.0).max_abs for n in (512, 1024)]
        ok = ok and r[0] <= 5e-3 and r[1] < r[0]
        lines.append(f"{name} {r[0]:.2e} -> {r[1]:.2e}")
    p = [residual_direct(get_solution("u6_1"), 0.5, [1.0], TimeGrid(1.0, n), eps=0.1).at(1.0, 1.0)
         for n in (512, 1024)]
    change = abs(p[1] - p[0]) / abs(p[1])
    ok = ok and abs(p[1]) >= 1e-3 and change < 0.10
    lines.append(f"u6_1(1,1) {p[0]:.6f} -> {p[1]:.6f} ({100 * change:.2f}% change)")
    report(7, ok, "; ".join(lines))


def test_criterion_8_probes(report):
    g = TimeGrid(1.0, 1024)
    u = GridFn(g, g.nodes**0.5)
    lhs, rhs = leibniz_terms(u, u, 0.5)
    lr = lhs.at(1.0) / rhs.at(1.0)
    m, c = chain_rule_terms("T^2", 0.5, g)
    cr = m.at(1.0) / c.at(1.0)
    two_over_pi = 2 / math.pi
    l9 = abs((lambda a, b: (a - b).at(1.0))(*leibniz_terms(u, u, 0.999)))
    c9 = abs((lambda a, b: (a - b).at(1.0))(*chain_rule_terms("T^2", 0.999, g)))
    nl = [probe_newton_leibniz(GridFn(TimeGrid(1.0, n), TimeGrid(1.0, n).nodes ** 2), 0.5) for n in (512, 1024)]
    ok = (abs(lr - two_over_pi) <= 1e-2 and abs(cr - two_over_pi) <= 1e-2 and l9 <= 1e-2 and c9 <= 1e-2
          and nl[0] <= 2e-2 and nl[1] < nl[0])
    report(8, ok, f"Leibniz ratio {lr:.7f}, chain ratio {cr:.7f} (2/pi {two_over_pi:.7f}); "
                  f"alpha=0.999 defects {l9:.2e}, {c9:.2e}; Newton-Leibniz {nl[0]:.2e} -> {nl[1]:.2e}")


def test_criterion_9_characteristics(report):
    s = CharSystem("1", "1", "0", 0.5, 1.0, "x")
    u11 = float(solution_surface(s, [1.0], [1.0])[0, 0])
    exact = 1 - 1 / math.gamma(1.5)
    x, t = np.linspace(0, 2, 256), np.linspace(0, 1, 256)
    U = solution_surface(s, x, t)
    res = verify_char_solution(s, U, x, t, t_min=0.1)
    res_all = verify_char_solution(s, U, x, t, t_min=t[1])
    adv = CharSystem("1", "1", "0", 1.0, 1.0, "x^2")
    Ua = solution_surface(adv, x, t)
    adv_res = float(np.max(np.abs(Ua - (x[:, None] - t[None, :]) ** 2)))
    adv_pde = verify_char_solution(adv, Ua, x, t, t_min=0.0)
    ok = abs(u11 - exact) <= 1e-8 and res <= 1e-2 and adv_pde <= 1e-8
    report(9, ok, f"u(1,1) = {u11:.10f} (exact {exact:.10f}); residual on t>=0.1 {res:.2e} "
                  f"(first node included: {res_all:.2e}); advection residual {adv_pde:.2e}, "
                  f"vs exact {adv_res:.2e}")


def test_criterion_10_group_laws(report):
    worst = 0.0
    for name in ("g1", "g2", "g3", "g4", "g5", "g6"):
        for p in _points(20, 10):
            e1, e2 = 0.05, 0.07
            once = apply_point(GroupElement(name, e1 + e2), p)
            twice = apply_point(GroupElement(name, e2), apply_point(GroupElement(name, e1), p))
            back = apply_point(GroupElement(name, -e1), apply_point(GroupElement(name, e1), p))
            worst = max(worst, *(abs(a - b) for a, b in zip(once, twice)), *(abs(a - b) for a, b in zip(back, p)))
    report(10, worst <= 1e-10, f"max composition/inverse error {worst:.2e}")
