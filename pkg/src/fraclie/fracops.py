r"""Numerical modified Riemann-Liouville calculus for :math:`0 < \alpha < 1`.

For continuous ``f`` the modified Riemann-Liouville derivative (the RL
derivative of ``f - f(0)``) coincides with the Caputo derivative, so the
classical L1 product-integration scheme is used. The probes at the bottom
return the defect of a claimed identity rather than assuming it holds.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from fraclie import expr as ex
from fraclie.special import GammaPoleError, gamma

__all__ = [
    "GammaPoleError",
    "GridFn",
    "TimeGrid",
    "frac_integral",
    "gamma",
    "l1_weights",
    "leibniz_terms",
    "chain_rule_terms",
    "mrl_deriv",
    "power_law_coeff",
    "probe_chain_rule",
    "probe_leibniz",
    "probe_newton_leibniz",
]


class FracOrderError(ValueError):
    pass


@dataclass(frozen=True)
class TimeGrid:
    """Uniform nodes ``t_i = i*h`` on ``[0, t_end]``, ``h = t_end/n``."""

    t_end: float
    n: int

    def __post_init__(self) -> None:
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ValueError("t_end must be positive and finite")
        if self.n < 2:
            raise ValueError("n must be at least 2")

    @property
    def h(self) -> float:
        return self.t_end / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.h

    def index_of(self, t: float) -> int:
        """Index of the node closest to ``t``."""
        return int(round(t / self.h))


@dataclass(frozen=True, eq=False)
class GridFn:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape[-1] != self.grid.n + 1:
            raise ValueError(f"expected {self.grid.n + 1} samples, got {v.shape[-1]}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, grid: TimeGrid, f) -> GridFn:
        return cls(grid, np.asarray(f(grid.nodes), dtype=float))

    def at(self, t: float) -> float:
        return float(self.values[..., self.grid.index_of(t)])

    def __add__(self, other: GridFn) -> GridFn:
        return GridFn(self.grid, self.values + other.values)

    def __sub__(self, other: GridFn) -> GridFn:
        return GridFn(self.grid, self.values - other.values)

    def __mul__(self, other: GridFn | float) -> GridFn:
        if isinstance(other, GridFn):
            return GridFn(self.grid, self.values * other.values)
        return GridFn(self.grid, self.values * other)

    __rmul__ = __mul__

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "value"])
            for t, v in zip(self.grid.nodes, self.values):
                w.writerow([f"{t:.17g}", f"{v:.17g}"])


def power_law_coeff(alpha: float, beta: float) -> float:
    """``Gamma(1+beta)/Gamma(1+beta-alpha)``: ``D^alpha x^beta = coeff * x^(beta-alpha)``."""
    if not beta - alpha > -1:
        raise ValueError("need beta - alpha > -1")
    return gamma(1.0 + beta) / gamma(1.0 + beta - alpha)


def _check_alpha(alpha: float, upper_inclusive: bool = False) -> None:
    ok = 0 < alpha <= 1 if upper_inclusive else 0 < alpha < 1
    if not ok:
        raise FracOrderError(f"alpha={alpha} outside {'(0, 1]' if upper_inclusive else '(0, 1)'}")


def l1_weights(n: int, alpha: float, h: float) -> np.ndarray:
    """Lower-triangular L1 matrix ``W`` with ``D[k] = sum_j W[k, j] (g[j+1] - g[j])``."""
    _check_alpha(alpha)
    l = np.arange(n, dtype=float)
    b = (l + 1.0) ** (1.0 - alpha) - l ** (1.0 - alpha)
    k = np.arange(n + 1)[:, None]
    j = np.arange(n)[None, :]
    lag = k - 1 - j
    W = np.where(lag >= 0, b[np.clip(lag, 0, n - 1)], 0.0)
    return W * h ** (-alpha) / gamma(2.0 - alpha)


def mrl_deriv_values(values: np.ndarray, alpha: float, h: float) -> np.ndarray:
    """L1 derivative along the last axis of ``values``; value at t=0 is 0."""
    values = np.asarray(values, dtype=float)
    n = values.shape[-1] - 1
    dg = np.diff(values, axis=-1)
    return dg @ l1_weights(n, alpha, h).T


def mrl_deriv(f: GridFn, alpha: float) -> GridFn:
    r"""Modified Riemann-Liouville derivative of order ``alpha`` by the L1 scheme.

    .. math::

        D^\alpha f(t_k) \approx \sum_{j<k} w_{k,j}\,(g_{j+1} - g_j),
        \qquad g = f - f(0),

    with :math:`w_{k,j} = ((t_k-t_j)^{1-\alpha} - (t_k-t_{j+1})^{1-\alpha}) / (h\,\Gamma(2-\alpha))`.
    Exact for piecewise-linear ``f``; :math:`O(h^{2-\alpha})` for smooth ``f``.
    """
    return GridFn(f.grid, mrl_deriv_values(f.values, alpha, f.grid.h))


def frac_integral_values(values: np.ndarray, alpha: float, h: float) -> np.ndarray:
    """Product-trapezoidal Riemann-Liouville integral along the last axis."""
    _check_alpha(alpha, upper_inclusive=True)
    values = np.asarray(values, dtype=float)
    n = values.shape[-1] - 1
    a1 = alpha + 1.0
    A = np.zeros((n + 1, n + 1))
    for k in range(1, n + 1):
        j = np.arange(1, k)
        d = k - j
        A[k, 1:k] = (d + 1.0) ** a1 - 2.0 * d**a1 + (d - 1.0) ** a1
        A[k, 0] = (k - 1.0) ** a1 - (k - alpha - 1.0) * k**alpha
        A[k, k] = 1.0
    A *= h**alpha / gamma(alpha + 2.0)
    return values @ A.T


def frac_integral(f: GridFn, alpha: float) -> GridFn:
    r"""``I^alpha f(t) = (1/Gamma(alpha)) int_0^t (t-s)^(alpha-1) f(s) ds``.

    Piecewise-linear interpolation of ``f`` integrated exactly against the kernel.
    """
    return GridFn(f.grid, frac_integral_values(f.values, alpha, f.grid.h))


# -- identity probes ----------------------------------------------------------


def probe_newton_leibniz(f: GridFn, alpha: float) -> float:
    """Max over nodes of ``|I^alpha D^alpha f - (f - f(0))|``."""
    _check_alpha(alpha)
    recon = frac_integral(mrl_deriv(f, alpha), alpha)
    return float(np.max(np.abs(recon.values - (f.values - f.values[0]))))


def probe_leibniz(u: GridFn, v: GridFn, alpha: float) -> GridFn:
    """Pointwise ``D(uv) - D(u) v - u D(v)``; zero if the product law held."""
    lhs, rhs = leibniz_terms(u, v, alpha)
    return lhs - rhs


def leibniz_terms(u: GridFn, v: GridFn, alpha: float) -> tuple[GridFn, GridFn]:
    """``(D(uv), D(u) v + u D(v))``, the two sides the probe compares."""
    if u.grid != v.grid:
        raise ValueError("u and v must share a grid")
    lhs = mrl_deriv(u * v, alpha)
    rhs = mrl_deriv(u, alpha) * v + u * mrl_deriv(v, alpha)
    return lhs, rhs


def chain_rule_terms(outer: ex.Expr | str, alpha: float, grid: TimeGrid) -> tuple[GridFn, GridFn]:
    """``(D_t^alpha F(T(t)), F'(T(t)))`` for an outer function of ``T``."""
    outer = ex.as_expr(outer)
    if not ex.free_vars(outer) <= {"T"}:
        raise ValueError("outer function must depend on T only")
    T = ex.alpha_time(grid.nodes, alpha)
    F = np.broadcast_to(ex.evaluate(outer, {"T": T}), T.shape)
    dF = np.broadcast_to(ex.evaluate(ex.diff(outer, "T"), {"T": T}), T.shape)
    return mrl_deriv(GridFn(grid, F), alpha), GridFn(grid, dF)


def probe_chain_rule(outer: ex.Expr | str, alpha: float, grid: TimeGrid) -> GridFn:
    """Pointwise ``D_t^alpha F(T(t)) - F'(T(t))`` with ``T = t^alpha/Gamma(1+alpha)``."""
    measured, claimed = chain_rule_terms(outer, alpha, grid)
    return measured - claimed
