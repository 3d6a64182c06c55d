"""Quasimodular forms as polynomials in G2 with modular coefficients."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InsufficientPrecision, NotDecomposable, OddWeight
from .exactq import CycRational, PuiseuxSeries, qs_mul
from .forms import (
    EisensteinAtom,
    FormExpr,
    g2_series,
    level_one_monomial_form,
    level_one_monomials,
    series_rational_coeffs,
    solve_exact,
)
from .lattice import Mat2Q


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _g4() -> FormExpr:
    return FormExpr.atom(EisensteinAtom(4))


class QuasiModularForm:
    """f = sum_i coeffs[i] * G2^i with coeffs[i] modular of weight k - 2i.

    ``level`` is the ambient congruence level N the form is attached to.
    The zero form has depth 0 and is compatible with every weight.
    """

    __slots__ = ("coeffs", "weight", "level")

    def __init__(self, coeffs: Sequence[FormExpr], weight: int, level: int = 1):
        if weight % 2:
            raise OddWeight(f"weight {weight} is odd")
        cs = list(coeffs)
        while cs and cs[-1].is_zero():
            cs.pop()
        for i, c in enumerate(cs):
            if c.weight is not None and c.weight != weight - 2 * i:
                raise ValueError(f"coefficient {i} has weight {c.weight}, expected {weight - 2 * i}")
        self.coeffs = tuple(cs)
        self.weight = int(weight)
        self.level = int(level)

    # constructors ------------------------------------------------------
    @classmethod
    def zero(cls, weight: int = 0, level: int = 1) -> "QuasiModularForm":
        return cls((), weight, level)

    @classmethod
    def constant(cls, c, level: int = 1) -> "QuasiModularForm":
        return cls((FormExpr.constant(c),), 0, level)

    @classmethod
    def modular(cls, f: FormExpr, level: int = 1, weight: int | None = None) -> "QuasiModularForm":
        w = f.weight if f.weight is not None else (weight or 0)
        return cls((f,), w, level)

    # views -------------------------------------------------------------
    @property
    def depth(self) -> int:
        return max(len(self.coeffs) - 1, 0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, i: int) -> FormExpr:
        return self.coeffs[i] if i < len(self.coeffs) else FormExpr.zero()

    def form_level(self) -> int:
        """Level N' such that every coefficient is invariant under Gamma(N')."""
        lvl = self.level
        for c in self.coeffs:
            lvl = _lcm(lvl, c.level)
        return lvl

    def with_level(self, level: int) -> "QuasiModularForm":
        return QuasiModularForm(self.coeffs, self.weight, level)

    # arithmetic --------------------------------------------------------
    def _merge_weight(self, other: "QuasiModularForm") -> int:
        if self.is_zero():
            return other.weight
        if other.is_zero() or self.weight == other.weight:
            return self.weight
        raise ValueError(f"cannot add forms of weights {self.weight} and {other.weight}")

    def __add__(self, other):
        other = _coerce_qm(other, self.level)
        n = max(len(self.coeffs), len(other.coeffs))
        coeffs = [self.coefficient(i) + other.coefficient(i) for i in range(n)]
        return QuasiModularForm(coeffs, self._merge_weight(other), max(self.level, other.level))

    __radd__ = __add__

    def __neg__(self):
        return QuasiModularForm([-c for c in self.coeffs], self.weight, self.level)

    def __sub__(self, other):
        return self + (-_coerce_qm(other, self.level))

    def __rsub__(self, other):
        return _coerce_qm(other, self.level) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CycRational)):
            return QuasiModularForm([c * other for c in self.coeffs], self.weight, self.level)
        if isinstance(other, FormExpr):
            other = QuasiModularForm.modular(other, self.level)
        return qm_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = QuasiModularForm.constant(1, self.level)
        for _ in range(e):
            out = qm_mul(out, self)
        return out

    # comparison --------------------------------------------------------
    def equals(self, other, prec: int | None = None) -> bool:
        other = _coerce_qm(other, self.level)
        n = max(len(self.coeffs), len(other.coeffs))
        return all(self.coefficient(i).equals(other.coefficient(i), prec) for i in range(n))

    def __eq__(self, other):
        if isinstance(other, (QuasiModularForm, FormExpr, int, Fraction, CycRational)):
            return self.equals(other)
        return NotImplemented

    __hash__ = None

    # expansions --------------------------------------------------------
    def expansion(self, prec) -> PuiseuxSeries:
        prec = Fraction(prec)
        total = PuiseuxSeries.zero(prec)
        g2 = g2_series(math.ceil(prec) + 1)
        power = PuiseuxSeries.constant(1, prec)
        for c in self.coeffs:
            total = total + qs_mul(c.expansion(prec), power)
            power = qs_mul(power, g2)
        return total.truncate(prec)

    # slash -------------------------------------------------------------
    def dslash(self, alpha: Mat2Q) -> "QuasiModularForm":
        return qm_dslash(self, alpha)

    # serialization -----------------------------------------------------
    def to_json(self) -> dict:
        return {
            "level": self.level,
            "weight": self.weight,
            "depth": self.depth,
            "coeffs": [c.to_json() for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, data) -> "QuasiModularForm":
        coeffs = [FormExpr.from_json(c) for c in data["coeffs"]]
        return cls(coeffs, int(data["weight"]), int(data.get("level", 1)))

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            body = str(c)
            if i == 0:
                parts.append(body)
                continue
            power = "G2" if i == 1 else f"G2^{i}"
            parts.append(power if body == "1" else f"({body})*{power}")
        return " + ".join(parts)

    def __repr__(self):
        return f"QuasiModularForm(weight={self.weight}, level={self.level}, {self})"


def _coerce_qm(x, level: int = 1) -> QuasiModularForm:
    if isinstance(x, QuasiModularForm):
        return x
    if isinstance(x, FormExpr):
        return QuasiModularForm.modular(x, level)
    if isinstance(x, (int, Fraction, CycRational)):
        return QuasiModularForm.constant(x, level) if x != 0 else QuasiModularForm.zero(0, level)
    raise TypeError(f"cannot use {x!r} as a quasimodular form")


G2 = QuasiModularForm((FormExpr.zero(), FormExpr.constant(1)), 2)


def g2_power(i: int, level: int = 1) -> QuasiModularForm:
    coeffs = [FormExpr.zero()] * i + [FormExpr.constant(1)]
    return QuasiModularForm(coeffs, 2 * i, level)


def qm_from_coeffs(coeffs: Iterable[FormExpr], weight: int, level: int = 1) -> QuasiModularForm:
    return QuasiModularForm(list(coeffs), weight, level)


# -------------------------------------------------------------- products


def qm_mul(f: QuasiModularForm, g: QuasiModularForm) -> QuasiModularForm:
    level = max(f.level, g.level)
    if f.is_zero() or g.is_zero():
        return QuasiModularForm.zero(f.weight + g.weight, level)
    coeffs = [FormExpr.zero()] * (len(f.coeffs) + len(g.coeffs) - 1)
    for i, a in enumerate(f.coeffs):
        if a.is_zero():
            continue
        for j, b in enumerate(g.coeffs):
            if not b.is_zero():
                coeffs[i + j] = coeffs[i + j] + a * b
    return QuasiModularForm(coeffs, f.weight + g.weight, level)


def qm_scale_by_form(f: QuasiModularForm, c: FormExpr) -> QuasiModularForm:
    """Multiply by a modular (depth 0) coefficient."""
    if c.is_zero() or f.is_zero():
        return QuasiModularForm.zero(f.weight + (c.weight or 0), f.level)
    return QuasiModularForm([a * c for a in f.coeffs], f.weight + c.weight, f.level)


def qm_dslash(f: QuasiModularForm, alpha: Mat2Q) -> QuasiModularForm:
    """f || alpha: slash each G2-coefficient in its own weight, keep G2 formal."""
    return QuasiModularForm([c.slash(alpha) for c in f.coeffs], f.weight, f.level)


# ------------------------------------------------------------- operators


def _shift_g2(f: QuasiModularForm, order: int) -> QuasiModularForm:
    """sum_i i a_i G2^(i + order - 2), the operator W_order."""
    coeffs: dict[int, FormExpr] = {}
    for i, a in enumerate(f.coeffs):
        if i == 0 or a.is_zero():
            continue
        coeffs[i + order - 2] = a * i
    if not coeffs:
        return QuasiModularForm.zero(f.weight + 2 * (order - 2), f.level)
    if min(coeffs) < 0:
        raise ValueError("W_0 would create a negative power of G2")
    dense = [coeffs.get(j, FormExpr.zero()) for j in range(max(coeffs) + 1)]
    return QuasiModularForm(dense, f.weight + 2 * (order - 2), f.level)


def op_W(order: int, f: QuasiModularForm) -> QuasiModularForm:
    if order < 1:
        raise ValueError("W_k needs k >= 1")
    return _shift_g2(f, order)


def op_E(f: QuasiModularForm) -> QuasiModularForm:
    return qm_scale_by_form(f, _g4())


def op_T(k: int, l: int, f: QuasiModularForm) -> QuasiModularForm:
    """T_k^l = E^l W_k."""
    if l < 0:
        raise ValueError("T_k^l needs l >= 0")
    out = op_W(k, f)
    if l:
        out = qm_scale_by_form(out, FormExpr.atom(EisensteinAtom(4), l))
    return out


# G2 derivative in normalised variables: theta G2 = (5/6) G4 - 2 G2^2, so
# D(G2) = -(1/4) theta G2 = -(5/24) G4 + (1/2) G2^2.
D_G4_COEFF = Fraction(-5, 24)
D_G2SQ_COEFF = Fraction(1, 2)


def op_D(f: QuasiModularForm) -> QuasiModularForm:
    return op_T(1, 1, f) * D_G4_COEFF + op_T(3, 0, f) * D_G2SQ_COEFF


def op_X(f: QuasiModularForm) -> QuasiModularForm:
    """Coefficient-wise Serre-type derivative; X(G2) = 0."""
    return QuasiModularForm([a.derivative() for a in f.coeffs], f.weight + 2, f.level)


def op_Y(f: QuasiModularForm) -> QuasiModularForm:
    """Coefficient-wise half weight: a_i G2^i -> ((k - 2i)/2) a_i G2^i."""
    return QuasiModularForm(
        [a * Fraction(f.weight - 2 * i, 2) for i, a in enumerate(f.coeffs)], f.weight, f.level
    )


# ------------------------------------------------------------- structure


def level_one_qm_basis(weight: int, depth: int) -> list[tuple[int, int, int]]:
    """Triples (i, a, b) for the monomials G2^i G4^a G6^b of the given weight."""
    out = []
    for i in range(depth + 1):
        for a, b in level_one_monomials(weight - 2 * i):
            out.append((i, a, b))
    return out


def decompose(series: PuiseuxSeries, weight: int, depth: int) -> QuasiModularForm:
    """Recover the G2-polynomial of a level-one quasimodular expansion.

    Raises NotDecomposable when the coefficients are inconsistent with every
    form of that weight and depth bound, and InsufficientPrecision when the
    known coefficients do not pin the form down.
    """
    if weight % 2:
        raise OddWeight(f"weight {weight} is odd")
    basis = level_one_qm_basis(weight, depth)
    count = math.ceil(series.prec)
    if count < len(basis):
        raise InsufficientPrecision(f"{len(basis)} unknowns but only {count} coefficients")
    target = series_rational_coeffs(series, count)
    g2 = g2_series(count + 1)
    cols = []
    for i, a, b in basis:
        s = level_one_monomial_form(a, b).expansion(count)
        for _ in range(i):
            s = qs_mul(s, g2)
        cols.append(series_rational_coeffs(s, count))
    sol = solve_exact(cols, target)
    coeffs = [FormExpr.zero()] * (depth + 1)
    for (i, a, b), x in zip(basis, sol):
        if x:
            coeffs[i] = coeffs[i] + level_one_monomial_form(a, b) * x
    return QuasiModularForm(coeffs, weight, 1)


__all__ = [
    "QuasiModularForm",
    "G2",
    "g2_power",
    "qm_from_coeffs",
    "qm_mul",
    "qm_scale_by_form",
    "qm_dslash",
    "op_D",
    "op_W",
    "op_E",
    "op_T",
    "op_X",
    "op_Y",
    "decompose",
    "level_one_qm_basis",
    "NotDecomposable",
]
