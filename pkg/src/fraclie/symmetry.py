"""Point symmetries of u_T = u_xx + u_x^2: prolongation, defects, brackets.

Vector fields act as ``xi*d/dx + tau*d/dT + phi*d/du`` with ``T`` the
alpha-time. The bracket convention is the standard ``[A, B] = A.B - B.A``;
:func:`compare_to_published` reports which sign convention the published
commutator table follows instead of silently flipping it.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from fraclie.jet import (
    JetPoly,
    on_shell_reduce,
    render,
    total_dT,
    total_dx,
)

_X = JetPoly.var("x")
_T = JetPoly.var("T")
_U_X = JetPoly.var("u_x")
_U_T = JetPoly.var("u_T")
_U_XX = JetPoly.var("u_xx")
_U_XT = JetPoly.var("u_xT")
_ONE = JetPoly.const(1)
_ZERO = JetPoly()


class VectorFieldError(ValueError):
    pass


@dataclass(frozen=True)
class VectorField:
    xi: JetPoly
    tau: JetPoly
    phi: JetPoly
    name: str = ""

    def __post_init__(self) -> None:
        for label, c in (("xi", self.xi), ("tau", self.tau)):
            if not c.depends_only_on(("x", "T")):
                raise VectorFieldError(f"{label} must depend on x and T only, got {c}")
        if not self.phi.depends_only_on(("x", "T", "u"), allow_exp=True):
            raise VectorFieldError(f"phi must depend on x, T, u only, got {self.phi}")

    def components(self) -> tuple[JetPoly, JetPoly, JetPoly]:
        return self.xi, self.tau, self.phi

    def apply(self, f: JetPoly) -> JetPoly:
        """Act on a coefficient function as a first-order operator."""
        return self.xi * f.partial("x") + self.tau * f.partial("T") + self.phi * f.partial("u")

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components())

    def __add__(self, other: VectorField) -> VectorField:
        return VectorField(self.xi + other.xi, self.tau + other.tau, self.phi + other.phi)

    def __sub__(self, other: VectorField) -> VectorField:
        return self + other.scale(-1)

    def scale(self, r: int | Fraction) -> VectorField:
        r = Fraction(r)
        return VectorField(self.xi * r, self.tau * r, self.phi * r, self.name)

    def same_field(self, other: VectorField) -> bool:
        return self.components() == other.components()

    def render(self) -> str:
        parts = []
        for coeff, op in ((self.xi, "d/dx"), (self.tau, "d/dT"), (self.phi, "d/du")):
            if not coeff.is_zero():
                parts.append(f"({render(coeff)})*{op}")
        return " + ".join(parts) if parts else "0"

    def __str__(self) -> str:
        label = f"{self.name} = " if self.name else ""
        return label + self.render()


def basis(v4: str = "corrected") -> list[VectorField]:
    """The six-dimensional algebra V1..V6.

    ``v4="printed"`` returns the misprinted ``x*d/du + 2T*d/dT`` instead of the
    scaling field ``x*d/dx + 2T*d/dT``; it is not a symmetry.
    """
    if v4 == "corrected":
        V4 = VectorField(_X, 2 * _T, _ZERO, "V4")
    elif v4 == "printed":
        V4 = VectorField(_ZERO, 2 * _T, _X, "V4")
    else:
        raise ValueError(f"v4 must be 'corrected' or 'printed', got {v4!r}")
    return [
        VectorField(_ONE, _ZERO, _ZERO, "V1"),
        VectorField(_ZERO, _ONE, _ZERO, "V2"),
        VectorField(_ZERO, _ZERO, _ONE, "V3"),
        V4,
        VectorField(2 * _T, _ZERO, -_X, "V5"),
        VectorField(4 * _X * _T, 4 * _T * _T, -(_X * _X) - 2 * _T, "V6"),
    ]


def vk_field(k: JetPoly, name: str | None = None) -> VectorField:
    """``V_k = k(x, T) exp(-u) d/du``."""
    if not k.depends_only_on(("x", "T")):
        raise VectorFieldError(f"k must be a function of x and T only, got {k}")
    return VectorField(_ZERO, _ZERO, k * JetPoly.exp_u(-1), name or f"V_k[{render(k)}]")


def infinitesimal_family(
    c1: int | Fraction = 0,
    c2: int | Fraction = 0,
    c3: int | Fraction = 0,
    c4: int | Fraction = 0,
    c5: int | Fraction = 0,
    c6: int | Fraction = 0,
    sign_variant: str = "minus",
) -> VectorField:
    """General point symmetry with polynomial coefficients.

    ``sign_variant`` selects the sign of the ``2*c6*T`` term in ``phi``:
    ``"minus"`` is the one consistent with V6, ``"plus"`` is the printed one.
    """
    if sign_variant not in ("minus", "plus"):
        raise ValueError("sign_variant must be 'minus' or 'plus'")
    c1, c2, c3, c4, c5, c6 = (Fraction(c) for c in (c1, c2, c3, c4, c5, c6))
    s = 1 if sign_variant == "plus" else -1
    xi = c1 + c4 * _X + 2 * c5 * _T + 4 * c6 * _X * _T
    tau = c2 + 2 * c4 * _T + 4 * c6 * _T * _T
    phi = c3 - c5 * _X + s * 2 * c6 * _T - c6 * _X * _X
    return VectorField(xi, tau, phi, "family")


@dataclass(frozen=True)
class ProlongationCoeffs:
    phi_x: JetPoly
    phi_t: JetPoly
    phi_xx: JetPoly


def prolong(V: VectorField) -> ProlongationCoeffs:
    """Second prolongation coefficients (off shell)."""
    xi, tau, phi = V.components()
    dx_xi, dx_tau = total_dx(xi), total_dx(tau)
    dphi = total_dx(phi)
    phi_x = dphi - dx_xi * _U_X - dx_tau * _U_T
    phi_t = total_dT(phi) - total_dT(xi) * _U_X - total_dT(tau) * _U_T
    phi_xx = (
        total_dx(dphi)
        - 2 * dx_xi * _U_XX
        - total_dx(dx_xi) * _U_X
        - 2 * dx_tau * _U_XT
        - total_dx(dx_tau) * _U_T
    )
    return ProlongationCoeffs(phi_x, phi_t, phi_xx)


def symmetry_defect(V: VectorField) -> JetPoly:
    """``(phi^t - phi^xx - 2 u_x phi^x)`` on shell; zero iff V is a symmetry."""
    pc = prolong(V)
    return on_shell_reduce(pc.phi_t - pc.phi_xx - 2 * _U_X * pc.phi_x)


def is_symmetry(V: VectorField) -> bool:
    return symmetry_defect(V).is_zero()


def bracket(V: VectorField, W: VectorField) -> VectorField:
    """``[V, W] = V.W - W.V`` componentwise."""
    return VectorField(
        V.apply(W.xi) - W.apply(V.xi),
        V.apply(W.tau) - W.apply(V.tau),
        V.apply(W.phi) - W.apply(V.phi),
        f"[{V.name},{W.name}]",
    )


# -- structure constants ----------------------------------------------------


def _flatten(V: VectorField) -> dict[tuple, Fraction]:
    out = {}
    for comp, poly in enumerate(V.components()):
        for key, c in poly.terms:
            out[(comp, key)] = c
    return out


def _solve_exact(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    """Solve the square system ``A c = b`` over the rationals."""
    n = len(A)
    M = [row[:] + [rhs] for row, rhs in zip(A, b)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if M[r][col] != 0), None)
        if pivot is None:
            return None
        M[col], M[pivot] = M[pivot], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * c for a, c in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def decompose(W: VectorField, fields: Sequence[VectorField]) -> tuple[list[Fraction], VectorField]:
    """Coordinates of ``W`` in ``fields`` and the leftover residual field.

    Uses exact normal equations, so the residual is zero iff W is in the span.
    """
    cols = [_flatten(V) for V in fields]
    target = _flatten(W)
    keys = sorted(set().union(target, *cols))
    gram = [[sum(ci.get(k, 0) * cj.get(k, 0) for k in keys) for cj in cols] for ci in cols]
    rhs = [sum(ci.get(k, 0) * target.get(k, 0) for k in keys) for ci in cols]
    coeffs = _solve_exact([[Fraction(v) for v in row] for row in gram], [Fraction(v) for v in rhs])
    if coeffs is None:
        raise VectorFieldError("basis fields are linearly dependent")
    residual = W
    for c, V in zip(coeffs, fields):
        residual = residual - V.scale(c)
    return coeffs, VectorField(residual.xi, residual.tau, residual.phi, "residual")


@dataclass(frozen=True)
class StructureTable:
    names: tuple[str, ...]
    coefficients: tuple[tuple[tuple[Fraction, ...], ...], ...]
    residuals: tuple[tuple[VectorField, ...], ...] = field(repr=False)

    def entry(self, i: int, j: int) -> tuple[Fraction, ...]:
        """Coordinates of ``[V_i, V_j]`` (1-based indices)."""
        return self.coefficients[i - 1][j - 1]

    def residual(self, i: int, j: int) -> VectorField:
        return self.residuals[i - 1][j - 1]

    @property
    def closed(self) -> bool:
        return all(r.is_zero() for row in self.residuals for r in row)

    @property
    def antisymmetric(self) -> bool:
        n = len(self.names)
        return all(
            self.coefficients[i][j] == tuple(-c for c in self.coefficients[j][i])
            for i in range(n)
            for j in range(n)
        )


def structure_table(fields: Sequence[VectorField] | None = None) -> StructureTable:
    fields = list(fields) if fields is not None else basis()
    coeffs, resid = [], []
    for V in fields:
        crow, rrow = [], []
        for W in fields:
            c, r = decompose(bracket(V, W), fields)
            crow.append(tuple(c))
            rrow.append(r)
        coeffs.append(tuple(crow))
        resid.append(tuple(rrow))
    return StructureTable(tuple(V.name for V in fields), tuple(coeffs), tuple(resid))


def jacobi_defect(U: VectorField, V: VectorField, W: VectorField) -> VectorField:
    return bracket(U, bracket(V, W)) + bracket(V, bracket(W, U)) + bracket(W, bracket(U, V))


def _vec(**kw: int) -> tuple[Fraction, ...]:
    out = [Fraction(0)] * 6
    for name, c in kw.items():
        out[int(name[1:]) - 1] = Fraction(c)
    return tuple(out)


# Published commutator list, upper triangle (i < j), 1-based.
PUBLISHED_TABLE: dict[tuple[int, int], tuple[Fraction, ...]] = {
    (1, 2): _vec(),
    (1, 3): _vec(),
    (1, 4): _vec(V1=-1),
    (1, 5): _vec(V3=1),
    (1, 6): _vec(V5=-2),
    (2, 3): _vec(),
    (2, 4): _vec(V2=-2),
    (2, 5): _vec(V1=-2),
    (2, 6): _vec(V3=2, V4=-4),
    (3, 4): _vec(),
    (3, 5): _vec(),
    (3, 6): _vec(),
    (4, 5): _vec(V5=-1),
    (4, 6): _vec(V6=-2),
    (5, 6): _vec(),
}


@dataclass(frozen=True)
class PairComparison:
    pair: tuple[int, int]
    coefficients: tuple[Fraction, ...]
    published: tuple[Fraction, ...]
    matches_identity: bool
    matches_flipped: bool

    @property
    def is_zero(self) -> bool:
        return not any(self.coefficients)


@dataclass(frozen=True)
class PublishedComparison:
    pairs: tuple[PairComparison, ...]

    @property
    def convention(self) -> str:
        nonzero = [p for p in self.pairs if not p.is_zero or any(p.published)]
        if all(p.matches_identity for p in self.pairs):
            return "identity"
        if all(p.matches_flipped for p in nonzero) and all(
            p.matches_identity for p in self.pairs if p not in nonzero
        ):
            return "global-sign-flipped"
        return "inconsistent"


def compare_to_published(table: StructureTable) -> PublishedComparison:
    """Check each computed bracket against the published list under both signs."""
    out = []
    for (i, j), published in sorted(PUBLISHED_TABLE.items()):
        c = table.entry(i, j)
        out.append(
            PairComparison(
                pair=(i, j),
                coefficients=c,
                published=published,
                matches_identity=c == published,
                matches_flipped=c == tuple(-p for p in published),
            )
        )
    return PublishedComparison(tuple(out))


HEAT_POLYNOMIALS: tuple[str, ...] = ("1", "x", "x^2/2 + T", "x^3/6 + x*T")
