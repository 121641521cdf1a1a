"""Exact polynomial algebra on the jet space of u(x, T).

A :class:`JetPoly` is a finite sum of terms ``r * monomial * exp(m*u)`` where
``r`` is a rational, the monomial runs over :data:`VARIABLES` and ``m`` is an
integer. Everything here is exact; there is no floating point outside
:meth:`JetPoly.evaluate`.

This module works in the alpha-time interpretation: the fractional time
derivative ``D_t^alpha`` is represented by the partial derivative in
``T = t**alpha / Gamma(1 + alpha)``. How well that identification holds for
direct quadrature is measured separately in :mod:`fraclie.fracops`.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from fractions import Fraction

import numpy as np

VARIABLES = (
    "x",
    "T",
    "u",
    "u_x",
    "u_T",
    "u_xx",
    "u_xT",
    "u_TT",
    "u_xxx",
    "u_xxT",
    "u_xxxx",
)
_INDEX = {name: i for i, name in enumerate(VARIABLES)}
_NVARS = len(VARIABLES)

BASE = ("x", "T", "u")
JET = VARIABLES[3:]

# x- and T-derivative of each jet coordinate; None means outside the jet
_DX = {
    "u": "u_x",
    "u_x": "u_xx",
    "u_T": "u_xT",
    "u_xx": "u_xxx",
    "u_xT": "u_xxT",
    "u_TT": None,
    "u_xxx": "u_xxxx",
    "u_xxT": None,
    "u_xxxx": None,
}
_DT = {
    "u": "u_T",
    "u_x": "u_xT",
    "u_T": "u_TT",
    "u_xx": "u_xxT",
    "u_xT": None,
    "u_TT": None,
    "u_xxx": None,
    "u_xxT": None,
    "u_xxxx": None,
}

_ORDER = {"x": 0, "T": 0, "u": 0, "u_x": 1, "u_T": 1, "u_xx": 2, "u_xT": 2, "u_TT": 2,
          "u_xxx": 3, "u_xxT": 3, "u_xxxx": 4}

Key = tuple[int, tuple[int, ...]]
Scalar = int | Fraction


class JetOrderError(ArithmeticError):
    """A total derivative would leave the supported jet coordinates."""


class JetPoly:
    """Canonical exact polynomial on the jet space times a power of ``e^u``."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Key, Scalar] | Iterable[tuple[Key, Scalar]] = ()) -> None:
        acc: dict[Key, Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for key, coeff in items:
            m, exps = key
            if len(exps) != _NVARS or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent vector {exps!r}")
            acc[(int(m), tuple(exps))] = acc.get((int(m), tuple(exps)), Fraction(0)) + Fraction(coeff)
        self._terms: tuple[tuple[Key, Fraction], ...] = tuple(
            sorted((k, c) for k, c in acc.items() if c != 0)
        )
        self._hash: int | None = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def const(cls, value: Scalar) -> JetPoly:
        return cls({(0, (0,) * _NVARS): Fraction(value)})

    @classmethod
    def var(cls, name: str, power: int = 1) -> JetPoly:
        exps = [0] * _NVARS
        exps[_INDEX[name]] = power
        return cls({(0, tuple(exps)): Fraction(1)})

    @classmethod
    def exp_u(cls, m: int) -> JetPoly:
        return cls({(int(m), (0,) * _NVARS): Fraction(1)})

    # -- access --------------------------------------------------------------

    @property
    def terms(self) -> tuple[tuple[Key, Fraction], ...]:
        return self._terms

    def as_dict(self) -> dict[Key, Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def constant_value(self) -> Fraction | None:
        if not self._terms:
            return Fraction(0)
        if len(self._terms) == 1:
            (m, exps), c = self._terms[0]
            if m == 0 and not any(exps):
                return c
        return None

    def as_multiple_of_u(self) -> int | None:
        """Return integer ``m`` if ``self == m*u``, else None."""
        if not self._terms:
            return 0
        if len(self._terms) != 1:
            return None
        (m, exps), c = self._terms[0]
        u_only = tuple(1 if i == _INDEX["u"] else 0 for i in range(_NVARS))
        if m == 0 and exps == u_only and c.denominator == 1:
            return int(c)
        return None

    def monomial_inverse(self) -> JetPoly | None:
        """Inverse of ``c * exp(m*u)``; None for anything else."""
        if len(self._terms) != 1:
            return None
        (m, exps), c = self._terms[0]
        if any(exps):
            return None
        return JetPoly({(-m, exps): 1 / c})

    def variables(self) -> set[str]:
        out = set()
        for (_, exps), _ in self._terms:
            out.update(VARIABLES[i] for i, e in enumerate(exps) if e)
        return out

    def m_powers(self) -> set[int]:
        return {m for (m, _), _ in self._terms}

    def depends_only_on(self, names: Iterable[str], allow_exp: bool = False) -> bool:
        allowed = set(names)
        if not allow_exp and any(m != 0 for m in self.m_powers()):
            return False
        return self.variables() <= allowed

    def jet_order(self) -> int:
        return max((_ORDER[v] for v in self.variables()), default=0)

    def degree_in(self, name: str) -> int:
        i = _INDEX[name]
        return max((exps[i] for (_, exps), _ in self._terms), default=0)

    # -- arithmetic --------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = JetPoly.const(other)
        if not isinstance(other, JetPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    def __add__(self, other: JetPoly | Scalar) -> JetPoly:
        other = _coerce(other)
        acc = dict(self._terms)
        for k, c in other._terms:
            acc[k] = acc.get(k, Fraction(0)) + c
        return JetPoly(acc)

    __radd__ = __add__

    def __neg__(self) -> JetPoly:
        return JetPoly((k, -c) for k, c in self._terms)

    def __sub__(self, other: JetPoly | Scalar) -> JetPoly:
        return self + (-_coerce(other))

    def __rsub__(self, other: JetPoly | Scalar) -> JetPoly:
        return _coerce(other) - self

    def __mul__(self, other: JetPoly | Scalar) -> JetPoly:
        if isinstance(other, (int, Fraction)):
            return JetPoly((k, c * other) for k, c in self._terms)
        acc: dict[Key, Fraction] = {}
        for (m1, e1), c1 in self._terms:
            for (m2, e2), c2 in other._terms:
                key = (m1 + m2, tuple(a + b for a, b in zip(e1, e2)))
                acc[key] = acc.get(key, Fraction(0)) + c1 * c2
        return JetPoly(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> JetPoly:
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = JetPoly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- calculus ------------------------------------------------------------

    def partial(self, name: str) -> JetPoly:
        """Partial derivative treating all jet coordinates as independent.

        For ``u`` this includes the ``m * exp(m*u)`` factor.
        """
        i = _INDEX[name]
        acc: dict[Key, Fraction] = {}
        for (m, exps), c in self._terms:
            if exps[i]:
                e = list(exps)
                e[i] -= 1
                key = (m, tuple(e))
                acc[key] = acc.get(key, Fraction(0)) + c * exps[i]
            if name == "u" and m:
                acc[(m, exps)] = acc.get((m, exps), Fraction(0)) + c * m
        return JetPoly(acc)

    # -- evaluation / rendering -------------------------------------------

    def evaluate(self, bindings: Mapping[str, float]):
        total = 0.0
        u = bindings.get("u", 0.0) if any(self.m_powers()) else 0.0
        for (m, exps), c in self._terms:
            term = float(c)
            for i, e in enumerate(exps):
                if e:
                    term = term * np.power(bindings[VARIABLES[i]], e)
            if m:
                term = term * np.exp(m * np.asarray(u, dtype=float))
            total = total + term
        return total if np.ndim(total) else float(total)

    def __str__(self) -> str:
        return render(self)

    def __repr__(self) -> str:
        return f"JetPoly({render(self)!r})"


def _coerce(p: JetPoly | Scalar) -> JetPoly:
    if isinstance(p, JetPoly):
        return p
    if isinstance(p, (int, Fraction)) and not isinstance(p, bool):
        return JetPoly.const(p)
    raise TypeError(f"cannot use {p!r} as a JetPoly")


def _monomial_text(m: int, exps: tuple[int, ...]) -> str:
    parts = []
    for i, e in enumerate(exps):
        if e == 1:
            parts.append(VARIABLES[i])
        elif e:
            parts.append(f"{VARIABLES[i]}^{e}")
    if m == 1:
        parts.append("exp(u)")
    elif m == -1:
        parts.append("exp(-u)")
    elif m:
        parts.append(f"exp({m}*u)")
    return "*".join(parts)


def render(p: JetPoly) -> str:
    """Canonical text: sorted terms, coefficients as ``p/q``. Parseable."""
    if p.is_zero():
        return "0"
    out = []
    for n, ((m, exps), c) in enumerate(p.terms):
        mono = _monomial_text(m, exps)
        mag = abs(c)
        if mono:
            body = mono if mag == 1 else f"{_frac_text(mag)}*{mono}"
        else:
            body = _frac_text(mag)
        if n == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


def _frac_text(r: Fraction) -> str:
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


# -- module-level operation names -------------------------------------------


def jp_add(p: JetPoly, q: JetPoly) -> JetPoly:
    return p + q


def jp_mul(p: JetPoly, q: JetPoly) -> JetPoly:
    return p * q


def jp_scale(r: Scalar, p: JetPoly) -> JetPoly:
    return p * Fraction(r)


def jp_is_zero(p: JetPoly) -> bool:
    return p.is_zero()


def _total(p: JetPoly, base: str, table: Mapping[str, str | None]) -> JetPoly:
    out = p.partial(base)
    for v in p.variables():
        if v in ("x", "T"):
            continue
        target = table[v]
        if target is None:
            raise JetOrderError(f"total derivative of {v} leaves the supported jet")
        out = out + JetPoly.var(target) * p.partial(v)
    if any(p.m_powers()) and "u" not in p.variables():
        out = out + JetPoly.var(table["u"]) * p.partial("u")
    return out


def total_dx(p: JetPoly) -> JetPoly:
    """Total x-derivative ``D_x``."""
    return _total(p, "x", _DX)


def total_dT(p: JetPoly) -> JetPoly:  # noqa: N802
    """Total alpha-time derivative ``D_T`` (stands in for ``D_t^alpha``)."""
    return _total(p, "T", _DT)


def substitute_var(p: JetPoly, name: str, q: JetPoly) -> JetPoly:
    """Replace every power of the coordinate ``name`` by the same power of ``q``."""
    i = _INDEX[name]
    if p.degree_in(name) == 0:
        return p
    powers: dict[int, JetPoly] = {}
    out = JetPoly()
    for (m, exps), c in p.terms:
        k = exps[i]
        rest = list(exps)
        rest[i] = 0
        term = JetPoly({(m, tuple(rest)): c})
        if k:
            if k not in powers:
                powers[k] = q**k
            term = term * powers[k]
        out = out + term
    return out


def _poly(terms: Iterable[tuple[Scalar, Mapping[str, int]]]) -> JetPoly:
    out = JetPoly()
    for coeff, mono in terms:
        term = JetPoly.const(coeff)
        for name, e in mono.items():
            term = term * JetPoly.var(name, e)
        out = out + term
    return out


# The equation u_T = u_xx + u_x^2 and its differential consequences.
# Highest T-count first so one pass is enough.
ON_SHELL_RULES: tuple[tuple[str, JetPoly], ...] = (
    ("u_TT", _poly([(1, {"u_xxxx": 1}), (4, {"u_x": 1, "u_xxx": 1}),
                    (2, {"u_xx": 2}), (4, {"u_x": 2, "u_xx": 1})])),
    ("u_xxT", _poly([(1, {"u_xxxx": 1}), (2, {"u_xx": 2}), (2, {"u_x": 1, "u_xxx": 1})])),
    ("u_xT", _poly([(1, {"u_xxx": 1}), (2, {"u_x": 1, "u_xx": 1})])),
    ("u_T", _poly([(1, {"u_xx": 1}), (1, {"u_x": 2})])),
)


def on_shell_reduce(p: JetPoly) -> JetPoly:
    """Eliminate ``u_T, u_xT, u_TT, u_xxT`` using the equation."""
    for name, rhs in ON_SHELL_RULES:
        p = substitute_var(p, name, rhs)
    return p


def equation_residual() -> JetPoly:
    """``u_T - u_xx - u_x^2`` as a JetPoly."""
    return JetPoly.var("u_T") - JetPoly.var("u_xx") - JetPoly.var("u_x", 2)
