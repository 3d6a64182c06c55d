"""Modular forms as exact polynomials in slash-aware atoms.

A :class:`FormExpr` is a canonical polynomial: a map from monomials (sorted
tuples of ``(atom, exponent)``) to exact coefficients.  Atoms carry a
canonical upper-triangular matrix ``hnf`` recording a pending slash, so
slashing is symbolic: ``(base | H) | alpha = (base | U') | H'`` where
``H alpha = U' r H'``.  Only the action of ``U'`` on the base needs a rule.

Slash convention: ``f |_k alpha = det(alpha)^(k/2) (cz+d)^(-k) f(alpha z)`` in
even weight.  Scalar matrices act trivially and the cocycle ``mu`` below
satisfies ``mu_{ab} = mu_a | b + mu_b`` exactly.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple

import flint

from .errors import InsufficientPrecision, NotDecomposable, NotPositiveDet, OddWeight, UnknownTransformation
from .exactq import (
    CycRational,
    PuiseuxSeries,
    qs_compose_affine,
    qs_div,
    qs_mul,
    qs_theta,
    root_of_unity,
)
from .lattice import Mat2Q, gamma_membership, hnf_decompose, hnf_matrix

IDENTITY_HNF = (1, 0, 1)

# ------------------------------------------------------------- precision

_CHECK_PREC: contextvars.ContextVar[int] = contextvars.ContextVar("check_prec", default=12)


def check_precision() -> int:
    """Precision (in q) used when symbolic equality is inconclusive."""
    return _CHECK_PREC.get()


@contextlib.contextmanager
def working_precision(prec: int):
    token = _CHECK_PREC.set(int(prec))
    try:
        yield
    finally:
        _CHECK_PREC.reset(token)


# ------------------------------------------------------- level-1 series


def bernoulli(n: int) -> Fraction:
    b = flint.fmpq.bernoulli(n)
    return Fraction(int(b.p), int(b.q))


@lru_cache(maxsize=None)
def _divisor_power_sums(k: int, n_max: int) -> tuple[int, ...]:
    sums = [0] * n_max
    for d in range(1, n_max):
        p = d**k
        for m in range(d, n_max, d):
            sums[m] += p
    return tuple(sums)


@lru_cache(maxsize=256)
def eisenstein_series(k: int, prec: int) -> PuiseuxSeries:
    """G_k = -B_k/(2k) + sum sigma_{k-1}(n) q^n to O(q^prec), k even >= 2."""
    if k % 2 or k < 2:
        raise OddWeight(f"weight {k} is not an even integer >= 2")
    prec = max(int(prec), 1)
    sig = _divisor_power_sums(k - 1, prec)
    coeffs = [-bernoulli(k) / (2 * k)] + list(sig[1:])
    return PuiseuxSeries.from_integer_coeffs(coeffs, prec)


def g2_series(prec: int) -> PuiseuxSeries:
    return eisenstein_series(2, prec)


@lru_cache(maxsize=64)
def delta_series(prec: int) -> PuiseuxSeries:
    """q prod (1 - q^n)^24 to O(q^prec) (the (2 pi)^12 factor is dropped)."""
    prec = max(int(prec), 1)
    n = max(prec - 1, 1)
    eta = flint.fmpq_poly([1])
    for k in range(1, n):
        factor = flint.fmpq_poly([1] + [0] * (k - 1) + [-1])
        eta = eta.mul_low(factor, n)
    body = eta.pow_trunc(24, n)
    coeffs = [0] + [body[i] for i in range(n)]
    return PuiseuxSeries.from_integer_coeffs([int(c) for c in coeffs[:prec]], prec)


def serre_derivative_series(s: PuiseuxSeries, weight: int) -> PuiseuxSeries:
    """X(g) = theta g - (k/12) E2 g = theta g + 2k G2 g for g of weight k."""
    prec = math.ceil(s.prec)
    return qs_theta(s) + qs_mul(g2_series(prec + 1), s) * (2 * weight)


# ---------------------------------------------------------- level-N Eisenstein


@lru_cache(maxsize=None)
def _polylog_numerator(n: int) -> tuple[int, ...]:
    """Numerator P_n with Li_{-n}(w) = P_n(w) / (1 - w)^(n+1)."""
    p = flint.fmpz_poly([0, 1])
    for j in range(1, n + 1):
        # w d/dw [P/(1-w)^j] = [w P' (1-w) + j w P] / (1-w)^(j+1)
        w = flint.fmpz_poly([0, 1])
        p = w * p.derivative() * flint.fmpz_poly([1, -1]) + j * w * p
    return tuple(int(c) for c in p.coeffs())


def polylog_negative(order: int, root: CycRational) -> CycRational:
    """Li_{-order}(w) = sum r^order w^r continued to a root of unity w != 1."""
    num = CycRational.rational(0)
    power = CycRational.rational(1)
    for c in _polylog_numerator(order):
        if c:
            num = num + power * c
        power = power * root
    den = (CycRational.rational(1) - root) ** (order + 1)
    return num / den


def _eisn_canonical(c: int, d: int, n: int) -> tuple[int, int]:
    v, w = (c % n, d % n), ((-c) % n, (-d) % n)
    return min(v, w)


@lru_cache(maxsize=512)
def eisn_series(k: int, c: int, d: int, n: int, prec: int) -> PuiseuxSeries:
    """Normalised q^(1/N)-expansion of sum over (m, n) = (c, d) mod N of (mz + n)^(-k)."""
    if k % 2 or k < 4:
        raise OddWeight(f"level-N Eisenstein weight {k} must be even and >= 4")
    terms: dict[int, CycRational] = {}
    if c % n == 0:
        if d % n == 0:
            terms[0] = CycRational.rational(-bernoulli(k) / (2 * k))
        else:
            terms[0] = polylog_negative(k - 1, root_of_unity(n, d)) * Fraction(1, 2)
    limit = prec * n
    half = Fraction(1, 2)
    for m in range(1, limit):
        plus, minus = m % n == c % n, m % n == (-c) % n
        if not (plus or minus):
            continue
        for r in range(1, (limit - 1) // m + 1):
            coeff = CycRational.rational(0)
            if plus:
                coeff = coeff + root_of_unity(n, r * d)
            if minus:
                coeff = coeff + root_of_unity(n, -r * d)
            if coeff.is_zero():
                continue
            coeff = coeff * (half * r ** (k - 1))
            e = m * r
            terms[e] = terms[e] + coeff if e in terms else coeff
    return PuiseuxSeries(n, terms, prec)


# ----------------------------------------------------------------- atoms


def _weight_factor(hnf: tuple[int, int, int], weight: int) -> Fraction:
    a, _, d = hnf
    return Fraction(a, d) ** (weight // 2)


def _apply_hnf(series: PuiseuxSeries, hnf: tuple[int, int, int], weight: int) -> PuiseuxSeries:
    """Normalised weight-k slash of a series by (a b; 0 d)."""
    if hnf == IDENTITY_HNF:
        return series
    a, b, d = hnf
    return qs_compose_affine(series, Fraction(a, d), Fraction(b, d)) * _weight_factor(hnf, weight)


def _base_prec(prec: Fraction, hnf: tuple[int, int, int]) -> int:
    a, _, d = hnf
    return math.ceil(Fraction(prec) * d / a)


@lru_cache(maxsize=200_000)
def _compose_hnf(hnf: tuple[int, int, int], alpha_entries) -> tuple:
    """(U', H') with hnf * alpha = U' r H'."""
    dec = hnf_decompose(hnf_matrix(hnf) @ Mat2Q(*alpha_entries))
    return dec.unimodular, dec.hnf


class Atom:
    """A generator of the symbolic ring: a base form with a pending slash."""

    hnf: tuple[int, int, int]
    kind_order = 0

    @property
    def weight(self) -> int:
        raise NotImplementedError

    @property
    def level(self) -> int:
        raise NotImplementedError

    def sort_key(self) -> tuple:
        raise NotImplementedError

    def __lt__(self, other: "Atom") -> bool:
        return self.sort_key() < other.sort_key()

    def with_hnf(self, hnf) -> "Atom":
        raise NotImplementedError

    def base_slash_unimodular(self, u: Mat2Q) -> "Atom":
        """The unslashed base form slashed by u in SL2(Z)."""
        raise NotImplementedError

    def base_expansion(self, prec: int) -> PuiseuxSeries:
        raise NotImplementedError

    def base_derivative(self) -> "FormExpr":
        """X applied to the unslashed base form."""
        raise NotImplementedError

    def valuation_bound(self) -> Fraction:
        """A lower bound for the q-valuation of the slashed expansion."""
        return Fraction(0)

    def expansion(self, prec) -> PuiseuxSeries:
        return _atom_expansion(self, Fraction(prec))

    def slash(self, alpha: Mat2Q) -> "FormExpr":
        u, hnf = _compose_hnf(self.hnf, alpha.entries())
        base = self.base_slash_unimodular(u)
        return FormExpr.atom(base.with_hnf(hnf))

    def derivative(self) -> "FormExpr":
        """X(base | H) = X(base) | H + (k/2) mu_H (base | H)."""
        out = self.base_derivative().slash(hnf_matrix(self.hnf))
        if self.hnf != IDENTITY_HNF:
            out = out + FormExpr.atom(MuAtom(self.hnf)) * FormExpr.atom(self) * Fraction(self.weight, 2)
        return out

    def to_json(self) -> dict:
        raise NotImplementedError


@lru_cache(maxsize=20_000)
def _atom_expansion(atom: Atom, prec: Fraction) -> PuiseuxSeries:
    base = atom.base_expansion(_base_prec(prec, atom.hnf))
    return _apply_hnf(base, atom.hnf, atom.weight).truncate(prec)


@dataclass(frozen=True, slots=True)
class EisensteinAtom(Atom):
    """Level-one Eisenstein series G_K, K >= 4 even."""

    K: int
    hnf: tuple[int, int, int] = IDENTITY_HNF
    kind_order = 0

    def __post_init__(self):
        if self.K % 2 or self.K < 4:
            raise OddWeight(f"Eisenstein atom needs even K >= 4, got {self.K}")

    @property
    def weight(self):
        return self.K

    @property
    def level(self):
        return 1

    def sort_key(self):
        return (0, self.K, self.hnf)

    def with_hnf(self, hnf):
        return EisensteinAtom(self.K, hnf)

    def base_slash_unimodular(self, u):
        return EisensteinAtom(self.K)

    def base_expansion(self, prec):
        return eisenstein_series(self.K, prec)

    def base_derivative(self):
        return _level_one_eisenstein_derivative(self.K)

    def to_json(self):
        return {"tag": "EIS1", "K": self.K, "hnf": list(self.hnf)}


@dataclass(frozen=True, slots=True)
class DeltaAtom(Atom):
    """The discriminant form q prod (1 - q^n)^24; negative powers give Delta inverse."""

    hnf: tuple[int, int, int] = IDENTITY_HNF

    @property
    def weight(self):
        return 12

    @property
    def level(self):
        return 1

    def sort_key(self):
        return (1, 0, self.hnf)

    def with_hnf(self, hnf):
        return DeltaAtom(hnf)

    def base_slash_unimodular(self, u):
        return DeltaAtom()

    def base_expansion(self, prec):
        return delta_series(prec)

    def base_derivative(self):
        return FormExpr.zero()

    def valuation_bound(self):
        a, _, d = self.hnf
        return Fraction(a, d)

    def to_json(self):
        return {"tag": "DELTA", "hnf": list(self.hnf)}


@dataclass(frozen=True, slots=True)
class EisensteinLevelAtom(Atom):
    """X^nx of the level-N Eisenstein series attached to (c, d) mod N."""

    k: int
    c: int
    d: int
    N: int
    nx: int = 0
    hnf: tuple[int, int, int] = IDENTITY_HNF

    def __post_init__(self):
        if self.k % 2 or self.k < 4:
            raise OddWeight(f"level-N Eisenstein weight {self.k} must be even and >= 4")
        if (self.c, self.d) != _eisn_canonical(self.c, self.d, self.N):
            raise ValueError("use eisenstein_level() to build canonical level-N atoms")

    @property
    def weight(self):
        return self.k + 2 * self.nx

    @property
    def level(self):
        return self.N

    def sort_key(self):
        return (2, (self.k, self.N, self.c, self.d, self.nx), self.hnf)

    def with_hnf(self, hnf):
        return EisensteinLevelAtom(self.k, self.c, self.d, self.N, self.nx, hnf)

    def base_slash_unimodular(self, u):
        if self.N == 1:
            return self.with_hnf(IDENTITY_HNF)
        a, b, c, d = u.int_entries()
        nc, nd = self.c * a + self.d * c, self.c * b + self.d * d
        nc, nd = _eisn_canonical(nc, nd, self.N)
        return EisensteinLevelAtom(self.k, nc, nd, self.N, self.nx)

    def base_expansion(self, prec):
        s = eisn_series(self.k, self.c, self.d, self.N, prec)
        w = self.k
        for _ in range(self.nx):
            s = serre_derivative_series(s, w)
            w += 2
        return s

    def base_derivative(self):
        return FormExpr.atom(EisensteinLevelAtom(self.k, self.c, self.d, self.N, self.nx + 1))

    def to_json(self):
        return {"tag": "EISN", "k": self.k, "c": self.c, "d": self.d, "N": self.N, "nx": self.nx, "hnf": list(self.hnf)}


@dataclass(frozen=True, slots=True)
class MuAtom(Atom):
    """mu_H = (1/6) theta log(Delta|H / Delta) = -4 (G2 |_2 H - G2), weight 2."""

    hnf: tuple[int, int, int]

    def __post_init__(self):
        if self.hnf == IDENTITY_HNF:
            raise ValueError("mu of the identity is zero; use mu_expr")

    @property
    def weight(self):
        return 2

    @property
    def level(self):
        a, _, d = self.hnf
        return a * d

    def sort_key(self):
        return (3, 0, self.hnf)

    def with_hnf(self, hnf):
        return MuAtom(hnf)

    def slash(self, alpha):
        # cocycle: mu_H | alpha = mu_{H alpha} - mu_alpha
        _, hnf = _compose_hnf(self.hnf, alpha.entries())
        return mu_expr_hnf(hnf) - mu_expr_hnf(hnf_decompose(alpha).hnf)

    def expansion(self, prec):
        return _mu_atom_expansion(self.hnf, Fraction(prec))

    def derivative(self):
        # X(mu) = (1/2) mu^2 - (10/3) (G4|H - G4)
        mu = FormExpr.atom(self)
        g4h = FormExpr.atom(EisensteinAtom(4, self.hnf))
        g4 = FormExpr.atom(EisensteinAtom(4))
        return mu * mu * Fraction(1, 2) - (g4h - g4) * Fraction(10, 3)

    def to_json(self):
        return {"tag": "MU", "hnf": list(self.hnf)}


@lru_cache(maxsize=4096)
def _mu_atom_expansion(hnf, prec: Fraction) -> PuiseuxSeries:
    # the unslashed G2 needs O(q^prec) too, which matters when a > d
    g2 = g2_series(max(_base_prec(prec, hnf), math.ceil(prec)) + 1)
    return ((_apply_hnf(g2, hnf, 2) - g2) * (-4)).truncate(prec)


@dataclass(frozen=True, slots=True)
class ExpansionAtom(Atom):
    """A raw q-expansion of a modular form for Gamma(level), with X^nx applied."""

    digest: str
    weight_: int
    level_: int
    nx: int = 0
    hnf: tuple[int, int, int] = IDENTITY_HNF
    series: PuiseuxSeries = field(default=None, compare=False, hash=False)

    @classmethod
    def of(cls, series: PuiseuxSeries, weight: int, level: int) -> "ExpansionAtom":
        if weight % 2:
            raise OddWeight(f"weight {weight} is odd")
        return cls(series.digest(), weight, level, 0, IDENTITY_HNF, series)

    @property
    def weight(self):
        return self.weight_ + 2 * self.nx

    @property
    def level(self):
        return self.level_

    def sort_key(self):
        return (4, (self.digest, self.weight_, self.level_, self.nx), self.hnf)

    def with_hnf(self, hnf):
        return ExpansionAtom(self.digest, self.weight_, self.level_, self.nx, hnf, self.series)

    def base_slash_unimodular(self, u):
        if not gamma_membership(u, self.level_):
            raise UnknownTransformation(f"raw expansion of level {self.level_} cannot be slashed by {u}")
        return self.with_hnf(IDENTITY_HNF)

    def base_expansion(self, prec):
        if prec > self.series.prec:
            raise InsufficientPrecision(f"raw expansion known to O(q^{self.series.prec}), {prec} requested")
        s = self.series.truncate(prec)
        w = self.weight_
        for _ in range(self.nx):
            s = serre_derivative_series(s, w)
            w += 2
        return s

    def valuation_bound(self):
        a, _, d = self.hnf
        v = self.series.valuation()
        return min(v, Fraction(0)) * Fraction(a, d) if v < 0 else v * Fraction(a, d)

    def base_derivative(self):
        return FormExpr.atom(ExpansionAtom(self.digest, self.weight_, self.level_, self.nx + 1, IDENTITY_HNF, self.series))

    def to_json(self):
        return {
            "tag": "EXPANSION",
            "series": self.series.to_json(),
            "weight": self.weight_,
            "level": self.level_,
            "nx": self.nx,
            "hnf": list(self.hnf),
        }


# ------------------------------------------------------------- FormExpr

Monomial = tuple  # tuple[tuple[Atom, int], ...] sorted by atom sort key


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    powers: dict = dict(m1)
    for atom, e in m2:
        powers[atom] = powers.get(atom, 0) + e
    return tuple(sorted(((a, e) for a, e in powers.items() if e), key=lambda t: t[0].sort_key()))


def _mono_weight(m: Monomial) -> int:
    return sum(a.weight * e for a, e in m)


class FormExpr:
    """A modular form as an exact polynomial in atoms.

    Every monomial has the same weight; the zero form has weight ``None``.
    """

    __slots__ = ("terms", "weight")

    def __init__(self, terms: Mapping[Monomial, CycRational], weight: int | None = None):
        clean = {m: c for m, c in terms.items() if not c.is_zero()}
        self.terms = clean
        if clean:
            weights = {_mono_weight(m) for m in clean}
            if len(weights) != 1:
                raise ValueError(f"inhomogeneous form with weights {sorted(weights)}")
            weight = weights.pop()
        else:
            weight = None
        self.weight = weight

    # constructors ------------------------------------------------------
    @classmethod
    def zero(cls) -> "FormExpr":
        return cls({})

    @classmethod
    def constant(cls, c) -> "FormExpr":
        return cls({(): CycRational.coerce(c)})

    @classmethod
    def atom(cls, atom: Atom, power: int = 1) -> "FormExpr":
        if power < 0 and not isinstance(atom, DeltaAtom):
            raise ValueError("only Delta may carry a negative exponent")
        return cls({((atom, power),) if power else (): CycRational.rational(1)})

    # views -------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def level(self) -> int:
        lvl = 1
        for m in self.terms:
            for a, _ in m:
                x = a.level * a.hnf[0] * a.hnf[2]
                lvl = lvl * x // math.gcd(lvl, x)
        return lvl

    def atoms(self) -> set:
        return {a for m in self.terms for a, _ in m}

    def is_constant(self) -> bool:
        return all(not m for m in self.terms)

    def constant_value(self) -> CycRational:
        if not self.is_constant():
            raise ValueError("not a constant")
        return self.terms.get((), CycRational.rational(0))

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda t: [(a.sort_key(), e) for a, e in t[0]])

    # ring --------------------------------------------------------------
    def __add__(self, other):
        other = _coerce_form(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms[m] + c if m in terms else c
        return FormExpr(terms)

    __radd__ = __add__

    def __neg__(self):
        return FormExpr({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_coerce_form(other))

    def __rsub__(self, other):
        return _coerce_form(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CycRational, flint.fmpq)):
            c = CycRational.coerce(other)
            if c.is_zero():
                return FormExpr.zero()
            return FormExpr({m: v * c for m, v in self.terms.items()})
        other = _coerce_form(other)
        terms: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                c = c1 * c2
                terms[m] = terms[m] + c if m in terms else c
        return FormExpr(terms)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers of general forms are not supported")
        result = FormExpr.constant(1)
        for _ in range(e):
            result = result * self
        return result

    # symbolic operations ---------------------------------------------
    def slash(self, alpha: Mat2Q) -> "FormExpr":
        """Normalised slash in the weight of this form."""
        if alpha.det() <= 0:
            raise NotPositiveDet(f"determinant of {alpha} is not positive")
        out = FormExpr.zero()
        cache: dict = {}
        for m, c in self.terms.items():
            term = FormExpr.constant(c)
            for atom, e in m:
                if atom not in cache:
                    cache[atom] = atom.slash(alpha)
                img = cache[atom]
                if e > 0:
                    for _ in range(e):
                        term = term * img
                else:
                    # only Delta atoms may carry negative exponents; their images are atoms
                    ((img_mono, _),) = img.terms.items()
                    ((img_atom, _),) = img_mono
                    term = term * FormExpr.atom(img_atom, e)
            out = out + term
        return out

    def derivative(self) -> "FormExpr":
        """The Serre-type derivation X (weight k -> k + 2)."""
        out = FormExpr.zero()
        for m, c in self.terms.items():
            for i, (atom, e) in enumerate(m):
                rest = m[:i] + m[i + 1:]
                rest_expr = FormExpr({_mono_mul(rest, ((atom, e - 1),) if e != 1 else ()): c * e})
                out = out + rest_expr * _atom_derivative(atom)
        return out

    def half_weight(self) -> "FormExpr":
        """Y(f) = (k/2) f."""
        if self.weight is None:
            return self
        return self * Fraction(self.weight, 2)

    # expansions --------------------------------------------------------
    def expansion(self, prec) -> PuiseuxSeries:
        prec = Fraction(prec)
        total = PuiseuxSeries.zero(prec)
        for m, c in self.terms.items():
            total = total + _monomial_expansion(m, prec) * c
        return total.truncate(prec)

    def equals(self, other, prec: int | None = None) -> bool:
        diff = self - _coerce_form(other)
        if diff.is_zero():
            return True
        p = check_precision() if prec is None else prec
        return diff.expansion(p).is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, CycRational, FormExpr)):
            return self.equals(other)
        return NotImplemented

    __hash__ = None

    # serialization -----------------------------------------------------
    def to_json(self) -> dict:
        terms = []
        for m, c in self.sorted_terms():
            factors = []
            for a, e in m:
                node = a.to_json()
                node["power"] = e
                factors.append(node)
            terms.append({"tag": "SCALE", "scalar": c.to_json(), "child": {"tag": "PRODUCT", "factors": factors}})
        return {"tag": "SUM", "terms": terms}

    @classmethod
    def from_json(cls, node) -> "FormExpr":
        return form_from_json(node)

    def __repr__(self):
        return f"FormExpr({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            mono = "*".join(_atom_name(a) + (f"^{e}" if e != 1 else "") for a, e in m)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts)


def _atom_name(a: Atom) -> str:
    h = "" if a.hnf == IDENTITY_HNF else "|({} {}; 0 {})".format(*a.hnf)
    if isinstance(a, EisensteinAtom):
        return f"G{a.K}{h}"
    if isinstance(a, DeltaAtom):
        return f"DELTA{h}"
    if isinstance(a, EisensteinLevelAtom):
        x = f"X^{a.nx}" if a.nx else ""
        return f"{x}EISN({a.k},{a.c},{a.d},{a.N}){h}"
    if isinstance(a, MuAtom):
        return "MU({} {}; 0 {})".format(*a.hnf)
    return f"EXP[{a.digest[:8]}]{h}"


def _coerce_form(x) -> FormExpr:
    if isinstance(x, FormExpr):
        return x
    if isinstance(x, (int, Fraction, CycRational, flint.fmpq)):
        return FormExpr.constant(x) if x != 0 else FormExpr.zero()
    raise TypeError(f"cannot use {x!r} as a form")


@lru_cache(maxsize=20_000)
def _atom_derivative(atom: Atom) -> FormExpr:
    return atom.derivative()


def _factor_prec(target: Fraction, v: Fraction, e: int) -> Fraction:
    """Precision of the atom needed so that atom^e is known to O(q^target)."""
    if e > 0:
        p = target - (e - 1) * v
    else:
        p = target + (1 - e) * v
    return max(p, v + 1)


@lru_cache(maxsize=50_000)
def _monomial_expansion(m: Monomial, prec: Fraction) -> PuiseuxSeries:
    if not m:
        return PuiseuxSeries.constant(1, prec)
    vals = [a.valuation_bound() * e for a, e in m]
    total = sum(vals, Fraction(0))
    out = None
    for (atom, e), v in zip(m, vals):
        need = prec - (total - v)
        s = atom.expansion(_factor_prec(need, atom.valuation_bound(), e)) ** e
        out = s if out is None else qs_mul(out, s)
    if out.prec < prec:
        raise InsufficientPrecision(f"monomial expansion reached O(q^{out.prec}) < O(q^{prec})")
    return out.truncate(prec)


def form_from_json(node) -> FormExpr:
    tag = node["tag"]
    if tag == "SUM":
        out = FormExpr.zero()
        for child in node["terms"]:
            out = out + form_from_json(child)
        return out
    if tag == "SCALE":
        return form_from_json(node["child"]) * CycRational.from_json(node["scalar"])
    if tag == "PRODUCT":
        out = FormExpr.constant(1)
        for child in node["factors"]:
            out = out * form_from_json(child)
        return out
    power = int(node.get("power", 1))
    hnf = tuple(node.get("hnf", IDENTITY_HNF))
    if tag == "EIS1":
        atom = EisensteinAtom(int(node["K"]), hnf)
    elif tag == "DELTA":
        atom = DeltaAtom(hnf)
    elif tag == "DELTAINV":
        atom, power = DeltaAtom(hnf), -power
    elif tag == "EISN":
        base = eisenstein_level(int(node["k"]), int(node["c"]), int(node["d"]), int(node["N"]))
        atom = EisensteinLevelAtom(base.k, base.c, base.d, base.N, int(node.get("nx", 0)), hnf)
    elif tag == "MU":
        return mu_expr_hnf(hnf) ** power
    elif tag == "EXPANSION":
        series = PuiseuxSeries.from_json(node["series"])
        base = ExpansionAtom.of(series, int(node["weight"]), int(node["level"]))
        atom = ExpansionAtom(base.digest, base.weight_, base.level_, int(node.get("nx", 0)), hnf, series)
    else:
        raise ValueError(f"unknown form node tag {tag!r}")
    return FormExpr.atom(atom, power)


# -------------------------------------------------------- public surface


class SlashResult(NamedTuple):
    expr: FormExpr
    exact: bool


def eisenstein(K: int, prec: int | None = None):
    """G_K as a symbolic form (K >= 4), or the quasimodular G2 when K = 2."""
    if K % 2 or K < 2:
        raise OddWeight(f"weight {K} is not an even integer >= 2")
    if K == 2:
        from .quasimod import G2

        return G2
    return FormExpr.atom(EisensteinAtom(K))


def delta(prec: int | None = None) -> FormExpr:
    return FormExpr.atom(DeltaAtom())


def delta_inverse() -> FormExpr:
    return FormExpr.atom(DeltaAtom(), -1)


def eisenstein_level(k: int, c: int, d: int, N: int) -> EisensteinLevelAtom:
    c, d = _eisn_canonical(c, d, N)
    return EisensteinLevelAtom(k, c, d, N)


def eisenstein_level_form(k: int, c: int, d: int, N: int) -> FormExpr:
    return FormExpr.atom(eisenstein_level(k, c, d, N))


def expansion_form(series: PuiseuxSeries, weight: int, level: int) -> FormExpr:
    return FormExpr.atom(ExpansionAtom.of(series, weight, level))


def slash(f: FormExpr, alpha: Mat2Q) -> SlashResult:
    expr = f.slash(alpha)
    exact = not any(isinstance(a, ExpansionAtom) for a in f.atoms())
    return SlashResult(expr, exact)


def slash_series(s: PuiseuxSeries, weight: int, alpha: Mat2Q) -> PuiseuxSeries:
    """Slash of a raw expansion by an upper-triangular alpha (series substitution)."""
    if alpha.c != 0:
        raise UnknownTransformation("series slash needs an upper-triangular matrix")
    if alpha.det() <= 0:
        raise NotPositiveDet(f"determinant of {alpha} is not positive")
    a, b, d = alpha.a, alpha.b, alpha.d
    if a <= 0:
        a, b, d = -a, -b, -d
    factor = (a * d) ** Fraction(weight, 2) / d**weight if weight % 2 == 0 else None
    if factor is None:
        raise OddWeight("odd weight slash")
    return qs_compose_affine(s, a / d, b / d) * factor


def mu_expr_hnf(hnf: tuple[int, int, int]) -> FormExpr:
    if hnf == IDENTITY_HNF:
        return FormExpr.zero()
    return FormExpr.atom(MuAtom(hnf))


def mu_expr(alpha: Mat2Q) -> FormExpr:
    """Symbolic mu_alpha (depends only on the canonical upper-triangular part)."""
    return mu_expr_hnf(hnf_decompose(alpha).hnf)


def nu_expr(alpha: Mat2Q, m: int) -> FormExpr:
    """nu_alpha^(m) = -(5/24)(G4^m | alpha - G4^m)."""
    if m < 1:
        raise ValueError("nu needs m >= 1")
    g4m = FormExpr.atom(EisensteinAtom(4), m)
    return (g4m.slash(alpha) - g4m) * Fraction(-5, 24)


def mu(alpha: Mat2Q, prec) -> PuiseuxSeries:
    """mu_alpha = (1/6) theta log(Delta|alpha / Delta), computed from expansions."""
    prec = Fraction(prec)
    d_alpha = delta().slash(alpha)
    # ratio R has valuation v(Delta|alpha) - 1; theta R / R needs R to relative precision prec
    va = d_alpha.terms and next(iter(d_alpha.terms))[0][0].valuation_bound()
    num = d_alpha.expansion(prec + va)
    den = delta_series(math.ceil(prec) + 2)
    ratio = qs_div(num, den)
    return (qs_div(qs_theta(ratio), ratio) * Fraction(1, 6)).truncate(prec)


def nu(alpha: Mat2Q, m: int, prec) -> PuiseuxSeries:
    """nu_alpha^(m) from expansions: -(5/24)(G4^m | alpha - G4^m)."""
    prec = Fraction(prec)
    g4m = FormExpr.atom(EisensteinAtom(4), m)
    return (g4m.slash(alpha).expansion(prec) - g4m.expansion(prec)) * Fraction(-5, 24)


# ------------------------------------------------- level-one linear algebra


def level_one_monomials(weight: int) -> list[tuple[int, int]]:
    """Exponents (a, b) with 4a + 6b = weight: the basis G4^a G6^b of M_weight."""
    if weight < 0 or weight % 2:
        return []
    return [(a, b) for b in range(weight // 6 + 1) for a in [(weight - 6 * b)] if a % 4 == 0 for a in [a // 4]]


def level_one_monomial_form(a: int, b: int) -> FormExpr:
    out = FormExpr.constant(1)
    if a:
        out = out * FormExpr.atom(EisensteinAtom(4), a)
    if b:
        out = out * FormExpr.atom(EisensteinAtom(6), b)
    return out


def solve_exact(columns: list[list[Fraction]], target: list[Fraction]) -> list[Fraction]:
    """Solve sum x_j columns[j] = target exactly; raise NotDecomposable if inconsistent."""
    rows = len(target)
    ncols = len(columns)
    if ncols == 0:
        if any(target):
            raise NotDecomposable("nonzero target with an empty basis")
        return []
    aug = flint.fmpq_mat(rows, ncols + 1)
    for i in range(rows):
        for j in range(ncols):
            v = columns[j][i]
            aug[i, j] = flint.fmpq(v.numerator, v.denominator)
        t = target[i]
        aug[i, ncols] = flint.fmpq(t.numerator, t.denominator)
    rref, rank = aug.rref()
    pivots = []
    r = 0
    for j in range(ncols + 1):
        if r < rank and rref[r, j] != 0:
            pivots.append(j)
            r += 1
    if ncols in pivots:
        raise NotDecomposable("inconsistent linear system: the series is not in the requested span")
    if len(pivots) < ncols:
        raise InsufficientPrecision("too few coefficients to determine the decomposition")
    out = []
    for i in range(ncols):
        v = rref[i, ncols]
        out.append(Fraction(int(v.p), int(v.q)))
    return out


def series_rational_coeffs(s: PuiseuxSeries, count: int) -> list[Fraction]:
    if s.prec < count:
        raise InsufficientPrecision(f"need O(q^{count}), series known to O(q^{s.prec})")
    out = []
    for n in range(count):
        c = s.coefficient(n)
        if not c.is_rational():
            raise NotDecomposable("coefficient outside Q")
        out.append(c.to_fraction())
    for e, _ in s.items():
        if e.denominator != 1 and e < count:
            raise NotDecomposable("fractional exponent in a level-one expansion")
    return out


def decompose_modular(s: PuiseuxSeries, weight: int) -> FormExpr:
    """Write a level-one modular expansion as a polynomial in G4, G6."""
    basis = level_one_monomials(weight)
    count = math.floor(s.prec) if s.prec.denominator != 1 else int(s.prec)
    target = series_rational_coeffs(s, count)
    cols = [series_rational_coeffs(level_one_monomial_form(a, b).expansion(count), count) for a, b in basis]
    sol = solve_exact(cols, target)
    out = FormExpr.zero()
    for (a, b), x in zip(basis, sol):
        if x:
            out = out + level_one_monomial_form(a, b) * x
    return out


@lru_cache(maxsize=None)
def _level_one_eisenstein_derivative(K: int) -> FormExpr:
    if K == 4:
        return FormExpr.atom(EisensteinAtom(6)) * Fraction(7, 10)
    if K == 6:
        return FormExpr.atom(EisensteinAtom(4), 2) * Fraction(400, 7)
    prec = K + 8
    s = serre_derivative_series(eisenstein_series(K, prec), K)
    return decompose_modular(s, K + 2)
