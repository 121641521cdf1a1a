"""One-parameter groups, solution transforms and residual checks.

Points are triples ``(x, T, u)`` in alpha-time. Closed-form group actions are
cross-checked against an RK4 integration of the generating vector field.

Two notions of "solves the equation" are offered:

* ``alpha-time``: ``u_T - u_xx - u_x^2`` with exact symbolic derivatives in T;
* ``direct``: the time derivative is the L1 quadrature of the modified
  Riemann-Liouville derivative in t, along each x-line.

Only solutions linear in T agree under both.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from fraclie import expr as ex
from fraclie.fracops import TimeGrid, mrl_deriv_values
from fraclie.ode import BlowUpError, rk4
from fraclie.symmetry import VectorField

Point = tuple[float, float, float]

GROUP_NAMES = ("g1", "g2", "g3", "g4", "g5", "g6", "g_alpha")
SOLUTION_VARS = frozenset({"x", "T", "c", "eps"})


class GroupDomainError(ValueError):
    pass


class HeatConditionError(ValueError):
    """``k`` does not satisfy ``k_T = k_xx``."""


@dataclass(frozen=True)
class GroupElement:
    """A member of one of the one-parameter groups.

    ``eps`` is a number, or a parameter name (default ``"eps"``) for symbolic
    transforms. ``k`` is the heat solution used by ``g_alpha``.
    """

    name: str
    eps: float | str = "eps"
    k: ex.Expr | None = None

    def __post_init__(self) -> None:
        if self.name not in GROUP_NAMES:
            raise ValueError(f"unknown group {self.name!r}")
        if self.name == "g_alpha":
            if self.k is None:
                raise ValueError("g_alpha needs a heat solution k")
            object.__setattr__(self, "k", ex.as_expr(self.k))
            check_heat_solution(self.k)

    @property
    def eps_expr(self) -> ex.Expr:
        if isinstance(self.eps, str):
            return ex.Var(self.eps)
        return ex.Const(float(self.eps))

    @property
    def eps_value(self) -> float:
        if isinstance(self.eps, str):
            raise ValueError(f"{self.name} has symbolic parameter {self.eps!r}")
        return float(self.eps)


def apply_point(g: GroupElement, p: Point) -> Point:
    """Image of ``(x, T, u)`` under the closed-form group action."""
    x, T, u = (float(v) for v in p)
    e = g.eps_value
    if g.name == "g1":
        return x + e, T, u
    if g.name == "g2":
        return x, T + e, u
    if g.name == "g3":
        return x, T, u + e
    if g.name == "g4":
        return x * math.exp(e), T * math.exp(2 * e), u
    if g.name == "g5":
        return x + 2 * e * T, T, u - e * e * T - x * e
    if g.name == "g6":
        d = 1.0 - 4.0 * e * T
        if d <= 0:
            raise GroupDomainError(f"g6 needs 1 - 4*eps*T > 0, got {d:g}")
        return x / d, T / d, u - x * x * e / d + 0.5 * math.log(d)
    # g_alpha
    k = ex.evaluate(g.k, {"x": x, "T": T})
    arg = math.exp(u) + e * k
    if arg <= 0:
        raise GroupDomainError("g_alpha needs exp(u) + eps*k > 0")
    return x, T, math.log(arg)


def flow(V: VectorField, eps: float, p: Point, steps: int = 1000) -> Point:
    """Integrate ``dx/de = xi, dT/de = tau, du/de = phi`` from ``p`` by RK4."""

    def rhs(_s: float, y: np.ndarray) -> np.ndarray:
        b = {"x": y[0], "T": y[1], "u": y[2]}
        return np.array([V.xi.evaluate(b), V.tau.evaluate(b), V.phi.evaluate(b)], dtype=float)

    try:
        y = rk4(rhs, p, eps, steps)
    except BlowUpError as exc:
        raise GroupDomainError(f"flow of {V.name} left its domain: {exc}") from exc
    return float(y[0]), float(y[1]), float(y[2])


# -- solutions ----------------------------------------------------------------


@dataclass(frozen=True)
class Solution:
    """A closed form ``u(x, T)`` with free parameters among ``c`` and ``eps``."""

    expr: ex.Expr
    name: str = ""
    seed: str = ""
    transforms: tuple[str, ...] = ()
    defaults: Mapping[str, float] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "expr", ex.as_expr(self.expr))
        extra = ex.free_vars(self.expr) - SOLUTION_VARS
        if extra:
            raise ValueError(f"solution has unexpected free variables {sorted(extra)}")

    @property
    def iterations(self) -> int:
        return len(self.transforms)

    def text(self) -> str:
        return ex.to_text(self.expr)

    def bindings(self, **params: float) -> dict[str, float]:
        b = {"c": 0.0, **self.defaults}
        b.update({k: v for k, v in params.items() if v is not None})
        return b

    def __call__(self, x, T, **params: float):
        return ex.evaluate(self.expr, {"x": x, "T": T, **self.bindings(**params)})


def _compose(f: ex.Expr, x_new: ex.Expr | None = None, T_new: ex.Expr | None = None) -> ex.Expr:
    mapping = {}
    if x_new is not None:
        mapping["x"] = x_new
    if T_new is not None:
        mapping["T"] = T_new
    return ex.substitute(f, mapping)


def transform_solution(g: GroupElement, f: Solution) -> Solution:
    """Pull a solution back along ``g`` to obtain a new solution."""
    e = g.eps_expr
    x, T, u = ex.Var("x"), ex.Var("T"), f.expr
    one = ex.Const(1)
    if g.name == "g1":
        new = _compose(u, x_new=x - e)
    elif g.name == "g2":
        new = _compose(u, T_new=T - e)
    elif g.name == "g3":
        new = u + e
    elif g.name == "g4":
        new = _compose(u, x_new=x * ex.exp(-e), T_new=T * ex.exp(-(ex.Const(2) * e)))
    elif g.name == "g5":
        new = _compose(u, x_new=x - ex.Const(2) * e * T) + (e ** ex.Const(2)) * T - x * e
    elif g.name == "g6":
        d = one + ex.Const(4) * e * T
        new = _compose(u, x_new=x / d, T_new=T / d) - (x ** ex.Const(2)) * e / d - ex.log(ex.sqrt(d))
    else:
        new = ex.log(ex.exp(u) + e * g.k)
    label = g.name if isinstance(g.eps, str) else f"{g.name}(eps={g.eps!r})"
    return replace(f, expr=new, name="", transforms=f.transforms + (label,))


def iterate_transform(g: GroupElement, f: Solution, n: int) -> Solution:
    if n < 0:
        raise ValueError("n must be non-negative")
    for _ in range(n):
        f = transform_solution(g, f)
    return f


def check_heat_solution(k: ex.Expr, samples: int = 32, seed: int = 0, tol: float = 1e-9) -> None:
    """Reject ``k`` unless ``k_T = k_xx``: exactly when polynomial, else on random points."""
    k = ex.as_expr(k)
    if not ex.free_vars(k) <= {"x", "T"}:
        raise HeatConditionError("k must depend on x and T only")
    defect = ex.diff(k, "T") - ex.diff(ex.diff(k, "x"), "x")
    try:
        exact = ex.to_jet_poly(defect)
    except ex.ConversionError:
        exact = None
    if exact is not None:
        if not exact.is_zero():
            raise HeatConditionError(f"k_T - k_xx = {exact} is not zero")
        return
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-2, 2, samples)
    Ts = rng.uniform(0.1, 2, samples)
    vals = np.asarray(ex.evaluate(defect, {"x": xs, "T": Ts}))
    scale = 1.0 + np.abs(np.asarray(ex.evaluate(k, {"x": xs, "T": Ts})))
    if np.any(np.abs(vals) > tol * scale):
        raise HeatConditionError("k_T - k_xx is not zero on sample points")


def superpose(f: Solution, k: ex.Expr | str, eps: float | str = "eps") -> Solution:
    """``log(exp(f) + eps*k)`` for a heat solution ``k``."""
    return transform_solution(GroupElement("g_alpha", eps, ex.as_expr(k)), f)


# -- catalog -------------------------------------------------------------------

_CATALOG = {
    "u5_1": ("c + eps^2*T - x*eps", "g5", 1, 1.0),
    "u5_2": ("c - 2*x*eps + 4*eps^2*T", "g5", 2, 1.0),
    "u6_1": ("c - x^2*eps/(1+4*eps*T) - log(sqrt(1+4*eps*T))", "g6", 1, 0.1),
    "u6_2": ("c - 2*eps*x^2/(1+8*eps*T) - log(sqrt(1+8*eps*T))", "g6", 2, 0.1),
}

# alpha = 1 forms, written in t
_CLASSICAL = {
    "u5_1": "c + eps^2*t - x*eps",
    "u5_2": "c - 2*x*eps + 4*eps^2*t",
    "u6_1": "c - eps*x^2/(1 + 4*eps*t) - 1/2*log(1 + 4*eps*t)",
    "u6_2": "c - 2*eps*x^2/(1 + 8*eps*t) - 1/2*log(1 + 8*eps*t)",
}

SOLUTION_NAMES = tuple(_CATALOG)


def catalog() -> list[Solution]:
    """The four exact solutions obtained from the constant seed ``u = c``."""
    return [get_solution(name) for name in _CATALOG]


def get_solution(name: str) -> Solution:
    try:
        text, g, n, eps = _CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown solution {name!r}; choose from {', '.join(_CATALOG)}") from None
    return Solution(ex.parse(text), name, "c", (g,) * n, {"eps": eps, "c": 0.0})


def classical_form(name: str) -> ex.Expr:
    return ex.parse(_CLASSICAL[name])


def specialize_alpha(f: Solution | ex.Expr, alpha: float) -> ex.Expr:
    """Rewrite in physical time: ``T -> t^alpha / gamma(1 + alpha)``."""
    e = f.expr if isinstance(f, Solution) else ex.as_expr(f)
    a = ex.Const(float(alpha))
    T = ex.Var("t") ** a / ex.gamma(ex.Const(1) + a)
    return ex.substitute(e, {"T": T})


def seed_constant() -> Solution:
    return Solution(ex.Var("c"), "c", "c", (), {"c": 0.0})


# -- residuals -------------------------------------------------------------------


@dataclass
class ResidualReport:
    solution: str
    semantics: str
    params: dict[str, float]
    x: np.ndarray
    time: np.ndarray
    residual: np.ndarray
    grid: dict[str, object]
    alpha: float | None = None
    t_min: float = 0.0

    @property
    def time_label(self) -> str:
        return "T" if self.semantics == "alpha-time" else "t"

    @property
    def window(self) -> np.ndarray:
        return self.time >= self.t_min - 1e-12 * max(1.0, abs(self.t_min))

    @property
    def max_abs(self) -> float:
        return float(np.nanmax(np.abs(self.residual[:, self.window])))

    @property
    def max_abs_all_nodes(self) -> float:
        return float(np.nanmax(np.abs(self.residual)))

    def at(self, x: float, time: float) -> float:
        i = int(np.argmin(np.abs(self.x - x)))
        j = int(np.argmin(np.abs(self.time - time)))
        return float(self.residual[i, j])

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "t_or_T", "residual"])
            for i, xv in enumerate(self.x):
                for j, tv in enumerate(self.time):
                    w.writerow([f"{xv:.17g}", f"{tv:.17g}", f"{self.residual[i, j]:.17g}"])


def _broadcast(value, shape) -> np.ndarray:
    return np.broadcast_to(np.asarray(value, dtype=float), shape)


def _jet_values(f: Solution, X: np.ndarray, T: np.ndarray, params: Mapping[str, float]):
    b = {"x": X, "T": T, **params}
    shape = np.broadcast(X, T).shape
    u_x = ex.diff(f.expr, "x")
    return {
        "u": _broadcast(ex.evaluate(f.expr, b), shape),
        "u_x": _broadcast(ex.evaluate(u_x, b), shape),
        "u_xx": _broadcast(ex.evaluate(ex.diff(u_x, "x"), b), shape),
        "u_T": _broadcast(ex.evaluate(ex.diff(f.expr, "T"), b), shape),
    }


def residual_alpha_time(
    f: Solution,
    x_nodes: Sequence[float],
    T_nodes: Sequence[float],
    **params: float,
) -> ResidualReport:
    """``u_T - u_xx - u_x^2`` on the tensor grid, derivatives taken symbolically."""
    x = np.asarray(x_nodes, dtype=float)
    T = np.asarray(T_nodes, dtype=float)
    b = f.bindings(**params)
    J = _jet_values(f, x[:, None], T[None, :], b)
    res = J["u_T"] - J["u_xx"] - J["u_x"] ** 2
    grid = {"x": [float(x[0]), float(x[-1]), len(x)], "T": [float(T[0]), float(T[-1]), len(T)]}
    return ResidualReport(f.name, "alpha-time", b, x, T, res, grid, t_min=float(T[0]))


def cole_hopf_residual(
    f: Solution,
    x_nodes: Sequence[float],
    T_nodes: Sequence[float],
    **params: float,
) -> ResidualReport:
    """Heat residual ``v_T - v_xx`` of ``v = exp(u)``."""
    x = np.asarray(x_nodes, dtype=float)
    T = np.asarray(T_nodes, dtype=float)
    b = f.bindings(**params)
    v = ex.exp(f.expr)
    bb = {"x": x[:, None], "T": T[None, :], **b}
    shape = (len(x), len(T))
    v_T = _broadcast(ex.evaluate(ex.diff(v, "T"), bb), shape)
    v_xx = _broadcast(ex.evaluate(ex.diff(ex.diff(v, "x"), "x"), bb), shape)
    grid = {"x": [float(x[0]), float(x[-1]), len(x)], "T": [float(T[0]), float(T[-1]), len(T)]}
    return ResidualReport(f.name, "cole-hopf", b, x, T, v_T - v_xx, grid, t_min=float(T[0]))


def residual_direct(
    f: Solution,
    alpha: float,
    x_nodes: Sequence[float],
    t_grid: TimeGrid,
    t_min: float = 0.1,
    **params: float,
) -> ResidualReport:
    """``D_t^alpha u - u_xx - u_x^2`` with the time derivative by L1 quadrature.

    The quadrature runs from t = 0; ``max_abs`` is taken over nodes with
    ``t >= t_min`` so the fixed-size start-up error of the L1 scheme on
    ``t^alpha``-type data does not mask the behaviour at positive times.
    ``max_abs_all_nodes`` keeps the full picture.
    """
    x = np.asarray(x_nodes, dtype=float)
    t = t_grid.nodes
    T = ex.alpha_time(t, alpha)
    b = f.bindings(**params)
    J = _jet_values(f, x[:, None], T[None, :], b)
    D = mrl_deriv_values(J["u"], alpha, t_grid.h)
    res = D - J["u_xx"] - J["u_x"] ** 2
    res[:, 0] = np.nan  # t = 0 is not an interior node
    grid = {"x": [float(x[0]), float(x[-1]), len(x)], "t": [0.0, t_grid.t_end, t_grid.n]}
    return ResidualReport(f.name, "direct", b, x, t, res, grid, alpha=alpha, t_min=t_min)


def alpha_time_grid(x_range=(0.0, 2.0, 50), T_range=(0.1, 2.0, 50)) -> tuple[np.ndarray, np.ndarray]:
    return np.linspace(*x_range[:2], int(x_range[2])), np.linspace(*T_range[:2], int(T_range[2]))
