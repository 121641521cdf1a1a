r"""Generalized method of characteristics for

.. math::

    a(x,t)\,\partial_x^\beta u + b(x,t)\,\partial_t^\alpha u = c(x,t),
    \qquad 0 < \alpha, \beta \le 1.

The fractional differentials are made concrete through the substitutions
``X = x^beta / Gamma(1+beta)`` and ``T = t^alpha / Gamma(1+alpha)``, under
which the characteristic system becomes the classical one

    dX/ds = a,   dT/ds = b,   du/ds = c,

with ``a, b, c`` evaluated at the mapped-back ``(x, t)``.
"""

from __future__ import annotations

import csv
import math
import warnings
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from fraclie import expr as ex
from fraclie.fracops import mrl_deriv_values
from fraclie.ode import BlowUpError, rk4
from fraclie.special import gamma


class CharacteristicsError(ValueError):
    pass


class RefinementWarning(UserWarning):
    """Residuals on the grid and on its coarsening disagree."""


@dataclass(frozen=True)
class CharSystem:
    a: ex.Expr
    b: ex.Expr
    c: ex.Expr
    alpha: float
    beta: float
    g: ex.Expr
    degenerate: bool = False

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "g"):
            object.__setattr__(self, name, ex.as_expr(getattr(self, name)))
        for name in ("a", "b", "c"):
            extra = ex.free_vars(getattr(self, name)) - {"x", "t"}
            if extra:
                raise CharacteristicsError(f"{name} may depend on x and t only, found {sorted(extra)}")
        if ex.free_vars(self.g) - {"x"}:
            raise CharacteristicsError("initial data g must be a function of x")
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise CharacteristicsError(f"{name}={v} outside (0, 1]")
        if not self.degenerate and _identically_zero(self.b):
            raise CharacteristicsError("b vanishes identically; set degenerate=True")

    # coordinate maps -------------------------------------------------------

    def X_of_x(self, x):  # noqa: N802
        return _to_scaled(x, self.beta, "x")

    def x_of_X(self, X):  # noqa: N802
        return _from_scaled(X, self.beta, "X")

    def T_of_t(self, t):  # noqa: N802
        return _to_scaled(t, self.alpha, "t")

    def t_of_T(self, T):  # noqa: N802
        return _from_scaled(T, self.alpha, "T")

    def coefficients(self, x, t):
        b = {"x": x, "t": t}
        shape = np.broadcast(np.asarray(x), np.asarray(t)).shape
        return tuple(
            np.broadcast_to(np.asarray(ex.evaluate(e, b), dtype=float), shape)
            for e in (self.a, self.b, self.c)
        )


def _identically_zero(e: ex.Expr) -> bool:
    rng = np.random.default_rng(1)
    xs, ts = rng.uniform(0, 2, 16), rng.uniform(0, 2, 16)
    try:
        vals = np.asarray(ex.evaluate(e, {"x": xs, "t": ts}))
    except ex.EvalError:
        return False
    return bool(np.all(vals == 0))


def _to_scaled(v, order: float, label: str):
    v = np.asarray(v, dtype=float)
    if order == 1:
        return v if v.ndim else float(v)
    if np.any(v < 0):
        raise CharacteristicsError(f"{label} must be non-negative for fractional order {order}")
    r = np.power(v, order) / gamma(1.0 + order)
    return r if r.ndim else float(r)


def _from_scaled(V, order: float, label: str):
    V = np.asarray(V, dtype=float)
    if order == 1:
        return V if V.ndim else float(V)
    if np.any(V < -1e-14):
        raise CharacteristicsError(f"{label} went negative for fractional order {order}")
    r = np.power(np.maximum(V, 0.0) * gamma(1.0 + order), 1.0 / order)
    return r if r.ndim else float(r)


@dataclass(frozen=True)
class Trajectory:
    s: np.ndarray
    x: np.ndarray
    t: np.ndarray
    u: np.ndarray

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "x", "t", "u"])
            for row in zip(self.s, self.x, self.t, self.u):
                w.writerow([f"{v:.17g}" for v in row])


def _launch(sys: CharSystem, p) -> tuple[float, float]:
    if isinstance(p, Iterable):
        x0, t0 = (float(v) for v in p)
    else:
        x0, t0 = float(p), 0.0
    if sys.beta < 1 and x0 < 0:
        raise CharacteristicsError("launch points need x0 >= 0 when beta < 1")
    if t0 < 0:
        raise CharacteristicsError("launch points need t0 >= 0")
    return x0, t0


def solve_characteristics(
    sys: CharSystem,
    launch_points: Sequence[float | tuple[float, float]],
    s_max: float,
    steps: int = 200,
) -> list[Trajectory]:
    """Integrate one characteristic from each launch point.

    A launch point is ``x0`` (on ``t = 0``) or an ``(x0, t0)`` pair; the
    initial value is ``u = g(x0)``.
    """
    if s_max <= 0:
        raise CharacteristicsError("s_max must be positive")
    out = []
    for p in launch_points:
        x0, t0 = _launch(sys, p)
        u0 = ex.evaluate(sys.g, {"x": x0})

        def rhs(_s: float, y: np.ndarray) -> np.ndarray:
            x, t = sys.x_of_X(y[0]), sys.t_of_T(y[1])
            a, b, c = sys.coefficients(x, t)
            return np.array([a, b, c], dtype=float)

        try:
            s, Y = rk4(rhs, [sys.X_of_x(x0), sys.T_of_t(t0), u0], s_max, steps, record=True)
        except BlowUpError as exc:
            raise CharacteristicsError(str(exc)) from exc
        out.append(Trajectory(s, np.asarray(sys.x_of_X(Y[:, 0])), np.asarray(sys.t_of_T(Y[:, 1])), Y[:, 2]))
    return out


def solution_surface(
    sys: CharSystem,
    x_nodes: Sequence[float],
    t_nodes: Sequence[float],
    steps: int = 64,
) -> np.ndarray:
    """Sample ``u`` on a tensor grid by tracing each node back to ``t = 0``.

    The backward characteristic is parametrized by ``T``:
    ``dX/dT = a/b``, ``du/dT = c/b``. Requires ``b != 0``.
    Returns an array of shape ``(len(x_nodes), len(t_nodes))``.
    """
    if sys.degenerate:
        raise CharacteristicsError("solution surface needs a non-degenerate system")
    x = np.asarray(x_nodes, dtype=float)
    t = np.asarray(t_nodes, dtype=float)
    Xg, Tg = np.meshgrid(sys.X_of_x(x), sys.T_of_t(t), indexing="ij")
    X_end, T_end = Xg.ravel(), Tg.ravel()

    def rhs(lam: float, y: np.ndarray) -> np.ndarray:
        X, T = y[0], T_end * (1.0 - lam)
        a, b, c = sys.coefficients(sys.x_of_X(X), sys.t_of_T(T))
        if np.any(b == 0):
            raise CharacteristicsError("b vanished on a backward characteristic")
        return np.stack([-T_end * a / b, -T_end * c / b])

    try:
        y = rk4(rhs, np.stack([X_end, np.zeros_like(X_end)]), 1.0, steps)
    except BlowUpError as exc:
        raise CharacteristicsError(str(exc)) from exc
    x0 = sys.x_of_X(y[0])
    u = np.asarray(ex.evaluate(sys.g, {"x": x0}), dtype=float) - y[1]
    return np.broadcast_to(u, X_end.shape).reshape(Xg.shape).copy()


def closed_form_solution(sys: CharSystem) -> ex.Expr:
    """Solution for constant ``a, b, c`` as an expression in ``(x, t)``."""
    vals = []
    for e in (sys.a, sys.b, sys.c):
        if ex.free_vars(e):
            raise CharacteristicsError("closed form needs constant coefficients")
        vals.append(ex.evaluate(e, {}))
    a, b, c = vals
    if b == 0:
        raise CharacteristicsError("closed form needs b != 0")
    t, x = ex.Var("t"), ex.Var("x")
    T = t if sys.alpha == 1 else t ** ex.Const(sys.alpha) / ex.gamma(ex.Const(1.0 + sys.alpha))
    X = x if sys.beta == 1 else x ** ex.Const(sys.beta) / ex.gamma(ex.Const(1.0 + sys.beta))
    X0 = X - ex.Const(a / b) * T
    x0 = X0 if sys.beta == 1 else (ex.gamma(ex.Const(1.0 + sys.beta)) * X0) ** ex.Const(1.0 / sys.beta)
    return ex.substitute(sys.g, {"x": x0}) + ex.Const(c / b) * T


def _derivative(u: np.ndarray, nodes: np.ndarray, order: float, axis: int) -> np.ndarray:
    if order == 1:
        return np.gradient(u, nodes, axis=axis, edge_order=2)
    h = np.diff(nodes)
    if abs(nodes[0]) > 1e-14 or not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise CharacteristicsError("fractional derivatives need a uniform grid starting at 0")
    moved = np.moveaxis(u, axis, -1)
    return np.moveaxis(mrl_deriv_values(moved, order, float(h[0])), -1, axis)


def char_residual(
    sys: CharSystem,
    u: np.ndarray,
    x_nodes: Sequence[float],
    t_nodes: Sequence[float],
) -> np.ndarray:
    """Pointwise ``a D_x^beta u + b D_t^alpha u - c`` on the grid."""
    x = np.asarray(x_nodes, dtype=float)
    t = np.asarray(t_nodes, dtype=float)
    u = np.asarray(u, dtype=float)
    if u.shape != (len(x), len(t)):
        raise CharacteristicsError(f"u has shape {u.shape}, expected {(len(x), len(t))}")
    Dx = _derivative(u, x, sys.beta, axis=0)
    Dt = _derivative(u, t, sys.alpha, axis=1)
    a, b, c = sys.coefficients(x[:, None], t[None, :])
    return a * Dx + b * Dt - c


def verify_char_solution(
    sys: CharSystem,
    u: np.ndarray,
    x_nodes: Sequence[float],
    t_nodes: Sequence[float],
    t_min: float = 0.1,
    x_min: float | None = None,
    refinement_tol: float | None = None,
) -> float:
    """Max-abs PDE residual of sampled ``u`` over ``t >= t_min`` (and ``x >= x_min``).

    Fractional orders use the L1 quadrature along the axis, order one uses
    second-order finite differences. The start-up layer near a fractional
    axis origin is excluded by the windows. With ``refinement_tol`` set the
    check is repeated on every other node and a :class:`RefinementWarning`
    is issued when the two disagree by more than that.
    """
    x = np.asarray(x_nodes, dtype=float)
    t = np.asarray(t_nodes, dtype=float)
    if x_min is None:
        x_min = 0.1 if sys.beta < 1 else -math.inf
    res = char_residual(sys, u, x, t)
    mask = (x[:, None] >= x_min) & (t[None, :] >= t_min)
    fine = float(np.max(np.abs(res[mask])))
    if refinement_tol is not None:
        uc = np.asarray(u)[::2, ::2]
        xc, tc = x[::2], t[::2]
        rc = char_residual(sys, uc, xc, tc)
        mc = (xc[:, None] >= x_min) & (tc[None, :] >= t_min)
        coarse = float(np.max(np.abs(rc[mc])))
        if abs(coarse - fine) > refinement_tol:
            warnings.warn(
                f"residual changes from {coarse:.3g} to {fine:.3g} under refinement",
                RefinementWarning,
                stacklevel=2,
            )
    return fine
