"""Fixed-step classical Runge-Kutta integration."""

from __future__ import annotations

from collections.abc import Callable

import numpy as np

RHS = Callable[[float, np.ndarray], np.ndarray]


class BlowUpError(ArithmeticError):
    pass


def rk4(
    rhs: RHS,
    y0,
    s_end: float,
    steps: int,
    s0: float = 0.0,
    record: bool = False,
    bound: float = 1e12,
):
    """Integrate ``y' = rhs(s, y)`` from ``s0`` to ``s_end`` in ``steps`` RK4 steps.

    Returns the final state, or ``(s, Y)`` sample arrays when ``record`` is set.
    Raises :class:`BlowUpError` once the state leaves ``|y| <= bound``.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    y = np.array(y0, dtype=float)
    h = (s_end - s0) / steps
    s = s0
    path = [y.copy()] if record else None
    for i in range(steps):
        k1 = rhs(s, y)
        k2 = rhs(s + h / 2, y + h / 2 * k1)
        k3 = rhs(s + h / 2, y + h / 2 * k2)
        k4 = rhs(s + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        s = s0 + (i + 1) * h
        if not np.all(np.isfinite(y)) or np.any(np.abs(y) > bound):
            raise BlowUpError(f"trajectory blew up at s={s:g}")
        if record:
            path.append(y.copy())
    if record:
        return np.linspace(s0, s_end, steps + 1), np.array(path)
    return y
