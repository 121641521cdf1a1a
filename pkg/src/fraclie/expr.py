"""Closed-form expressions: parsing, printing, evaluation and differentiation.

The grammar is deliberately small::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := ("-")? power
    power  := atom ("^" factor)?
    atom   := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"

Integer literals are kept as exact :class:`~fractions.Fraction` constants, so
``1/2`` folds to an exact rational. Decimal literals become floats. The only
simplification performed is folding of arithmetic on constants.

The alpha-time ``T = t**alpha / Gamma(1 + alpha)`` is an ordinary variable
name here; see :func:`alpha_time`.
"""

from __future__ import annotations

import math
import re
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from fraclie import special

Number = Union[Fraction, float]

FUNCTIONS = {"exp": 1, "log": 1, "sqrt": 1, "gamma": 1, "pow": 2}

_MAX_DEPTH = 200
_MAX_FOLD_EXPONENT = 64

# precedence levels used by the printer
_ADD, _MUL, _NEG, _POW, _ATOM = 1, 2, 3, 4, 5


class ExprError(Exception):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} at offset {position}")
        self.message = message
        self.position = position


class EvalError(ExprError, ValueError):
    pass


class EvalDomainError(EvalError):
    pass


class UnboundVariableError(EvalError):
    pass


class DiffError(ExprError):
    pass


class ConversionError(ExprError):
    pass


# --------------------------------------------------------------------------
# nodes
# --------------------------------------------------------------------------


class Expr:
    """Base class of expression nodes. Nodes are immutable and hashable."""

    __slots__ = ()

    def __add__(self, other: object) -> Expr:
        return BinOp("+", self, as_expr(other))

    def __radd__(self, other: object) -> Expr:
        return BinOp("+", as_expr(other), self)

    def __sub__(self, other: object) -> Expr:
        return BinOp("-", self, as_expr(other))

    def __rsub__(self, other: object) -> Expr:
        return BinOp("-", as_expr(other), self)

    def __mul__(self, other: object) -> Expr:
        return BinOp("*", self, as_expr(other))

    def __rmul__(self, other: object) -> Expr:
        return BinOp("*", as_expr(other), self)

    def __truediv__(self, other: object) -> Expr:
        return BinOp("/", self, as_expr(other))

    def __rtruediv__(self, other: object) -> Expr:
        return BinOp("/", as_expr(other), self)

    def __pow__(self, other: object) -> Expr:
        return BinOp("^", self, as_expr(other))

    def __neg__(self) -> Expr:
        return Neg(self)

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, eq=True, repr=True)
class Const(Expr):
    value: Number

    def __post_init__(self) -> None:
        if isinstance(self.value, bool) or not isinstance(self.value, (Fraction, float, int)):
            raise TypeError(f"unsupported constant {self.value!r}")
        if isinstance(self.value, int):
            object.__setattr__(self, "value", Fraction(self.value))

    @property
    def is_exact(self) -> bool:
        return isinstance(self.value, Fraction)


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def __post_init__(self) -> None:
        if self.op not in "+-*/^" or len(self.op) != 1:
            raise ValueError(f"unknown operator {self.op!r}")


@dataclass(frozen=True)
class Call(Expr):
    func: str
    args: tuple[Expr, ...]

    def __post_init__(self) -> None:
        if self.func not in FUNCTIONS:
            raise ValueError(f"unknown function {self.func!r}")
        if len(self.args) != FUNCTIONS[self.func]:
            raise ValueError(f"{self.func} takes {FUNCTIONS[self.func]} argument(s)")


def Add(a: Expr, b: Expr) -> BinOp:  # noqa: N802
    return BinOp("+", a, b)


def Sub(a: Expr, b: Expr) -> BinOp:  # noqa: N802
    return BinOp("-", a, b)


def Mul(a: Expr, b: Expr) -> BinOp:  # noqa: N802
    return BinOp("*", a, b)


def Div(a: Expr, b: Expr) -> BinOp:  # noqa: N802
    return BinOp("/", a, b)


def Pow(a: Expr, b: Expr) -> BinOp:  # noqa: N802
    return BinOp("^", a, b)


def as_expr(value: object) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return parse(value)
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return Const(Fraction(value))
    if isinstance(value, float):
        return Const(value)
    raise TypeError(f"cannot convert {value!r} to an expression")


def exp(e: object) -> Expr:
    return Call("exp", (as_expr(e),))


def log(e: object) -> Expr:
    return Call("log", (as_expr(e),))


def sqrt(e: object) -> Expr:
    return Call("sqrt", (as_expr(e),))


def gamma(e: object) -> Expr:
    return Call("gamma", (as_expr(e),))


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, Neg):
        return (e.arg,)
    if isinstance(e, BinOp):
        return (e.left, e.right)
    if isinstance(e, Call):
        return e.args
    return ()


def leaves(e: Expr) -> list[Expr]:
    kids = children(e)
    if not kids:
        return [e]
    out: list[Expr] = []
    for k in kids:
        out.extend(leaves(k))
    return out


@lru_cache(maxsize=4096)
def free_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset((e.name,))
    out: frozenset[str] = frozenset()
    for k in children(e):
        out |= free_vars(k)
    return out


# --------------------------------------------------------------------------
# constant folding
# --------------------------------------------------------------------------


def _fold_numbers(op: str, a: Number, b: Number) -> Number | None:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return a / b if b != 0 else None
        if b.denominator != 1 or abs(b) > _MAX_FOLD_EXPONENT:
            return None
        if a == 0 and b < 0:
            return None
        return a**b
    try:
        fa, fb = float(a), float(b)
        if op == "+":
            r = fa + fb
        elif op == "-":
            r = fa - fb
        elif op == "*":
            r = fa * fb
        elif op == "/":
            r = fa / fb
        else:
            r = fa**fb
    except (OverflowError, ZeroDivisionError, ValueError):
        return None
    if not isinstance(r, float) or not math.isfinite(r):
        return None
    return r


def _fold(e: Expr) -> Expr:
    if isinstance(e, Neg) and isinstance(e.arg, Const):
        return Const(-e.arg.value)
    if isinstance(e, BinOp) and isinstance(e.left, Const) and isinstance(e.right, Const):
        r = _fold_numbers(e.op, e.left.value, e.right.value)
        if r is not None:
            return Const(r)
    return e


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[a-zA-Z_][a-zA-Z0-9_]*)|(?P<op>[-+*/^(),]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # num, ident, op, end
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        assert kind is not None
        start = m.start(kind)
        tokens.append(_Token(kind, m.group(kind), start))
        pos = m.end()
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.i = 0
        self.depth = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind != "op":
            found = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            raise ParseError(f"expected {text!r}, found {found}", self.tok.pos)
        self.advance()

    def enter(self) -> None:
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            raise ParseError("expression nested too deeply", self.tok.pos)

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return e

    def expr(self) -> Expr:
        self.enter()
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            e = _fold(BinOp(op, e, self.term()))
        self.depth -= 1
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            e = _fold(BinOp(op, e, self.factor()))
        return e

    def factor(self) -> Expr:
        self.enter()
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            e = _fold(Neg(self.power()))
        else:
            e = self.power()
        self.depth -= 1
        return e

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return _fold(BinOp("^", base, self.factor()))
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            if re.fullmatch(r"\d+", t.text):
                return Const(Fraction(int(t.text)))
            value = float(t.text)
            if not math.isfinite(value):
                raise ParseError("numeric literal out of range", t.pos)
            return Const(value)
        if t.kind == "ident":
            self.advance()
            if self.tok.kind == "op" and self.tok.text == "(":
                if t.text not in FUNCTIONS:
                    raise ParseError(f"unknown function {t.text!r}", t.pos)
                self.advance()
                args = [self.expr()]
                while self.tok.kind == "op" and self.tok.text == ",":
                    self.advance()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != FUNCTIONS[t.text]:
                    raise ParseError(
                        f"{t.text} takes {FUNCTIONS[t.text]} argument(s), got {len(args)}", t.pos
                    )
                return Call(t.text, tuple(args))
            return Var(t.text)
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise ParseError(f"unexpected {found}", t.pos)


@lru_cache(maxsize=1024)
def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises :class:`ParseError` carrying the character offset of the problem.
    """
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# printing
# --------------------------------------------------------------------------


def _const_text(v: Number) -> tuple[str, int]:
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator), (_NEG if v < 0 else _ATOM)
        return f"{v.numerator}/{v.denominator}", _MUL
    if not math.isfinite(v):
        raise ValueError(f"cannot print non-finite constant {v!r}")
    return repr(float(v)), (_NEG if v < 0 or (v == 0 and math.copysign(1, v) < 0) else _ATOM)


def _text(e: Expr) -> tuple[str, int]:
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, Var):
        return e.name, _ATOM
    if isinstance(e, Call):
        return f"{e.func}({', '.join(to_text(a) for a in e.args)})", _ATOM
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _POW), _NEG
    if isinstance(e, BinOp):
        if e.op in "+-":
            return f"{_wrap(e.left, _ADD)} {e.op} {_wrap(e.right, _MUL)}", _ADD
        if e.op in "*/":
            return f"{_wrap(e.left, _MUL)}{e.op}{_wrap(e.right, _NEG)}", _MUL
        return f"{_wrap(e.left, _ATOM)}^{_wrap(e.right, _NEG)}", _POW
    raise TypeError(f"not an expression node: {e!r}")


def _wrap(e: Expr, min_level: int) -> str:
    s, level = _text(e)
    return s if level >= min_level else f"({s})"


def to_text(e: Expr) -> str:
    """Render ``e`` so that ``parse(to_text(e)) == e`` for parsed trees."""
    return _text(e)[0]


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

Evaluator = Callable[[Mapping[str, object]], object]


def _check_finite(r, what: str):
    if not np.all(np.isfinite(r)):
        raise EvalDomainError(f"{what}: result is not finite")
    return r


def _power(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any((a < 0) & (b != np.round(b))):
        raise EvalDomainError("negative base with non-integer exponent")
    if np.any((a == 0) & (b < 0)):
        raise EvalDomainError("division by zero (zero to a negative power)")
    with np.errstate(all="ignore"):
        return _check_finite(np.power(a, b), "power")


def _gamma_values(a):
    a = np.asarray(a, dtype=float)
    try:
        if a.ndim == 0:
            return np.float64(special.gamma(float(a)))
        return np.vectorize(special.gamma, otypes=[float])(a)
    except special.GammaPoleError as exc:
        raise EvalDomainError(str(exc)) from exc
    except OverflowError as exc:
        raise EvalDomainError("gamma overflow") from exc


def _log(a):
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0):
        raise EvalDomainError("log of non-positive argument")
    return np.log(a)


def _sqrt(a):
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise EvalDomainError("sqrt of negative argument")
    return np.sqrt(a)


def _exp(a):
    with np.errstate(all="ignore"):
        return _check_finite(np.exp(np.asarray(a, dtype=float)), "exp")


def _div(a, b):
    b = np.asarray(b, dtype=float)
    if np.any(b == 0):
        raise EvalDomainError("division by zero")
    with np.errstate(all="ignore"):
        return _check_finite(np.asarray(a, dtype=float) / b, "division")


def _arith(op: str):
    def f(a, b):
        with np.errstate(all="ignore"):
            a = np.asarray(a, dtype=float)
            if op == "+":
                r = a + b
            elif op == "-":
                r = a - b
            else:
                r = a * b
        return _check_finite(r, op)

    return f


_UNARY = {"exp": _exp, "log": _log, "sqrt": _sqrt, "gamma": _gamma_values}
_BINARY = {"+": _arith("+"), "-": _arith("-"), "*": _arith("*"), "/": _div, "^": _power}


@lru_cache(maxsize=4096)
def compile_expr(e: Expr) -> Evaluator:
    """Compile ``e`` to a closure over a bindings mapping.

    Bindings may be floats or numpy arrays (broadcast together).
    """
    if isinstance(e, Const):
        v = np.float64(float(e.value))
        return lambda b: v
    if isinstance(e, Var):
        name = e.name

        def var(b):
            try:
                return b[name]
            except KeyError:
                raise UnboundVariableError(f"unbound variable {name!r}") from None

        return var
    if isinstance(e, Neg):
        inner = compile_expr(e.arg)
        return lambda b: -np.asarray(inner(b), dtype=float)
    if isinstance(e, BinOp):
        left, right = compile_expr(e.left), compile_expr(e.right)
        fn = _BINARY[e.op]
        return lambda b: fn(left(b), right(b))
    if isinstance(e, Call):
        args = [compile_expr(a) for a in e.args]
        if e.func == "pow":
            return lambda b: _power(args[0](b), args[1](b))
        fn = _UNARY[e.func]
        arg = args[0]
        return lambda b: fn(arg(b))
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e: Expr | str, bindings: Mapping[str, object]):
    """Evaluate ``e``; returns a float for scalar bindings, else an array.

    Raises :class:`EvalDomainError` outside the real domain (log/sqrt of bad
    arguments, division by zero, gamma poles, overflow) and
    :class:`UnboundVariableError` when a free variable is missing.
    """
    e = as_expr(e)
    r = compile_expr(e)(bindings)
    r = np.asarray(r, dtype=float)
    if r.ndim == 0:
        return float(r)
    return r


def alpha_time(t, alpha: float):
    """``T = t**alpha / Gamma(1 + alpha)``."""
    return np.power(t, alpha) / special.gamma(1.0 + alpha)


# --------------------------------------------------------------------------
# differentiation and substitution
# --------------------------------------------------------------------------

ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def _is_const(e: Expr, value: Number) -> bool:
    return isinstance(e, Const) and e.value == value


def _add(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    return _fold(BinOp("+", a, b))


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return _neg(b)
    return _fold(BinOp("-", a, b))


def _neg(a: Expr) -> Expr:
    if isinstance(a, Neg):
        return a.arg
    return _fold(Neg(a))


def _mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0) or _is_const(b, 0):
        return ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if _is_const(a, -1):
        return _neg(b)
    return _fold(BinOp("*", a, b))


def _div_e(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0):
        return ZERO
    if _is_const(b, 1):
        return a
    return _fold(BinOp("/", a, b))


def _pow_e(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 1):
        return a
    if _is_const(b, 0):
        return ONE
    return _fold(BinOp("^", a, b))


def diff(e: Expr | str, var: str) -> Expr:
    """Exact symbolic partial derivative of ``e`` with respect to ``var``."""
    e = as_expr(e)
    if var not in free_vars(e):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Neg):
        return _neg(diff(e.arg, var))
    if isinstance(e, BinOp):
        a, b = e.left, e.right
        if e.op == "+":
            return _add(diff(a, var), diff(b, var))
        if e.op == "-":
            return _sub(diff(a, var), diff(b, var))
        if e.op == "*":
            return _add(_mul(diff(a, var), b), _mul(a, diff(b, var)))
        if e.op == "/":
            num = _sub(_mul(diff(a, var), b), _mul(a, diff(b, var)))
            return _div_e(num, _pow_e(b, Const(Fraction(2))))
        return _diff_power(a, b, var)
    if isinstance(e, Call):
        if e.func == "pow":
            return _diff_power(e.args[0], e.args[1], var)
        (a,) = e.args
        da = diff(a, var)
        if e.func == "exp":
            return _mul(e, da)
        if e.func == "log":
            return _div_e(da, a)
        if e.func == "sqrt":
            return _div_e(da, _mul(Const(Fraction(2)), e))
        raise DiffError("differentiation of gamma is not supported")
    raise TypeError(f"not an expression node: {e!r}")


def _diff_power(a: Expr, b: Expr, var: str) -> Expr:
    if var not in free_vars(b):
        return _mul(_mul(b, _pow_e(a, _sub(b, ONE))), diff(a, var))
    if var not in free_vars(a):
        return _mul(_mul(BinOp("^", a, b), log(a)), diff(b, var))
    inner = _add(_mul(diff(b, var), log(a)), _div_e(_mul(b, diff(a, var)), a))
    return _mul(BinOp("^", a, b), inner)


def substitute(e: Expr | str, mapping: Mapping[str, object]) -> Expr:
    """Replace variables by expressions (simultaneously)."""
    e = as_expr(e)
    repl = {k: as_expr(v) for k, v in mapping.items()}
    return _subst(e, repl)


def _subst(e: Expr, repl: Mapping[str, Expr]) -> Expr:
    if isinstance(e, Var):
        return repl.get(e.name, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, Neg):
        return Neg(_subst(e.arg, repl))
    if isinstance(e, BinOp):
        return BinOp(e.op, _subst(e.left, repl), _subst(e.right, repl))
    if isinstance(e, Call):
        return Call(e.func, tuple(_subst(a, repl) for a in e.args))
    raise TypeError(f"not an expression node: {e!r}")


# --------------------------------------------------------------------------
# bridge to JetPoly
# --------------------------------------------------------------------------


def to_jet_poly(e: Expr | str):
    """Convert a polynomial-exponential expression to a :class:`JetPoly`.

    Accepts polynomials in the jet variables with rational coefficients,
    optionally multiplied by ``exp(m*u)`` for integer ``m``.
    """
    from fraclie.jet import VARIABLES, JetPoly

    e = as_expr(e)

    def conv(node: Expr) -> JetPoly:
        if isinstance(node, Const):
            v = node.value
            return JetPoly.const(v if isinstance(v, Fraction) else Fraction(repr(v)))
        if isinstance(node, Var):
            if node.name not in VARIABLES:
                raise ConversionError(f"{node.name!r} is not a jet variable")
            return JetPoly.var(node.name)
        if isinstance(node, Neg):
            return -conv(node.arg)
        if isinstance(node, BinOp):
            if node.op == "+":
                return conv(node.left) + conv(node.right)
            if node.op == "-":
                return conv(node.left) - conv(node.right)
            if node.op == "*":
                return conv(node.left) * conv(node.right)
            if node.op == "/":
                den = conv(node.right)
                c = den.constant_value()
                if c is None:
                    raise ConversionError("division by a non-constant")
                if c == 0:
                    raise ConversionError("division by zero")
                return conv(node.left) * (1 / c)
            return _conv_power(conv(node.left), node.right)
        if isinstance(node, Call):
            if node.func == "exp":
                arg = conv(node.args[0])
                m = arg.as_multiple_of_u()
                if m is None:
                    raise ConversionError("exp() argument must be an integer multiple of u")
                return JetPoly.exp_u(m)
            if node.func == "pow":
                return _conv_power(conv(node.args[0]), node.args[1])
            raise ConversionError(f"{node.func}() is not polynomial")
        raise TypeError(f"not an expression node: {node!r}")

    def _conv_power(base: JetPoly, exponent: Expr) -> JetPoly:
        if not (isinstance(exponent, Const) and exponent.is_exact and exponent.value.denominator == 1):
            raise ConversionError("exponent must be an integer constant")
        n = int(exponent.value)
        if n >= 0:
            return base**n
        inv = base.monomial_inverse()
        if inv is None:
            raise ConversionError("negative power of a non-monomial")
        return inv ** (-n)

    return conv(e)
