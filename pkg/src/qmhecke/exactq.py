"""Exact scalars in cyclotomic fields and truncated Puiseux series in q.

A :class:`CycRational` is an element of Q(zeta_M) stored as a rational
polynomial reduced modulo the M-th cyclotomic polynomial.  A
:class:`PuiseuxSeries` is a finite sum of terms c * q^(n/M) together with an
absolute precision bound: every exponent below ``prec`` is known exactly.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

import flint

__all__ = [
    "CycRational",
    "PuiseuxSeries",
    "DivisionByZeroSeries",
    "root_of_unity",
    "qs_add",
    "qs_mul",
    "qs_theta",
    "qs_div",
    "qs_inverse",
    "qs_compose_scale",
    "qs_compose_affine",
    "format_series",
]


class DivisionByZeroSeries(ZeroDivisionError):
    """Raised when dividing by a series with no known nonzero term."""


# ---------------------------------------------------------------- cyclotomic


@lru_cache(maxsize=None)
def _cyclotomic(m: int) -> flint.fmpq_poly:
    return flint.fmpq_poly(flint.fmpz_poly.cyclotomic(m))


@lru_cache(maxsize=None)
def _totient(m: int) -> int:
    return _cyclotomic(m).degree()


@lru_cache(maxsize=4096)
def _monomial_mod(m: int, e: int) -> flint.fmpq_poly:
    """x^e reduced modulo Phi_m."""
    return flint.fmpq_poly([0] * e + [1]) % _cyclotomic(m)


def _as_fmpq(x) -> flint.fmpq:
    if isinstance(x, flint.fmpq):
        return x
    if isinstance(x, int):
        return flint.fmpq(x)
    if isinstance(x, Fraction):
        return flint.fmpq(x.numerator, x.denominator)
    if isinstance(x, str):
        return _as_fmpq(Fraction(x))
    raise TypeError(f"cannot read {x!r} as a rational")


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


class CycRational:
    """An element of Q(zeta_M) in the power basis modulo Phi_M.

    Conductors congruent to 2 mod 4 never appear: Q(zeta_2m) equals
    Q(zeta_m) for odd m and :func:`root_of_unity` lands in the smaller field.
    """

    __slots__ = ("conductor", "poly")

    def __init__(self, conductor: int, poly: flint.fmpq_poly):
        self.conductor = conductor
        self.poly = poly

    # construction ----------------------------------------------------------
    @classmethod
    def rational(cls, x) -> "CycRational":
        return cls(1, flint.fmpq_poly([_as_fmpq(x)]))

    @classmethod
    def from_coords(cls, conductor: int, coords: Iterable) -> "CycRational":
        coords = [_as_fmpq(c) for c in coords]
        if len(coords) != _totient(conductor):
            raise ValueError("coordinate vector length must equal the totient of the conductor")
        return cls(conductor, flint.fmpq_poly(coords))

    @classmethod
    def coerce(cls, x) -> "CycRational":
        if isinstance(x, CycRational):
            return x
        return cls.rational(x)

    # basic views -----------------------------------------------------------
    @property
    def coords(self) -> list[Fraction]:
        phi = _totient(self.conductor)
        cs = [Fraction(int(c.p), int(c.q)) for c in self.poly.coeffs()]
        return cs + [Fraction(0)] * (phi - len(cs))

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def is_rational(self) -> bool:
        return self.poly.degree() <= 0

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not a rational number")
        c = self.poly[0]
        return Fraction(int(c.p), int(c.q))

    def embed(self, conductor: int) -> "CycRational":
        """Image in Q(zeta_conductor); requires self.conductor | conductor."""
        if conductor == self.conductor:
            return self
        if conductor % self.conductor:
            raise ValueError(f"cannot embed conductor {self.conductor} into {conductor}")
        step = conductor // self.conductor
        if self.poly.degree() <= 0:
            return CycRational(conductor, self.poly)
        out = flint.fmpq_poly()
        for i, c in enumerate(self.poly.coeffs()):
            if c != 0:
                out += c * _monomial_mod(conductor, i * step)
        return CycRational(conductor, out)

    def reduced(self) -> "CycRational":
        """The same number written over the smallest conductor that contains it."""
        if self.is_rational():
            return CycRational(1, self.poly) if self.conductor != 1 else self
        n = self.conductor
        target = self.coords
        for m in range(1, n):
            if n % m:
                continue
            phi = _totient(m)
            cols = [root_of_unity(m, i).embed(n).coords for i in range(phi)]
            aug = flint.fmpq_mat(len(target), phi + 1)
            for r, t in enumerate(target):
                for j in range(phi):
                    aug[r, j] = _as_fmpq(cols[j][r])
                aug[r, phi] = _as_fmpq(t)
            rref, rank = aug.rref()
            # consistent iff the augmented column is not a pivot
            if all(rref[r, phi] == 0 or any(rref[r, j] != 0 for j in range(phi)) for r in range(rank)):
                sol = [Fraction(int(rref[j, phi].p), int(rref[j, phi].q)) for j in range(phi)]
                return CycRational.from_coords(m, sol)
        return self

    def _align(self, other: "CycRational") -> tuple[int, flint.fmpq_poly, flint.fmpq_poly]:
        if self.conductor == other.conductor:
            return self.conductor, self.poly, other.poly
        m = _lcm(self.conductor, other.conductor)
        return m, self.embed(m).poly, other.embed(m).poly

    # arithmetic ------------------------------------------------------------
    def __add__(self, other):
        other = CycRational.coerce(other)
        m, a, b = self._align(other)
        return CycRational(m, a + b)

    __radd__ = __add__

    def __neg__(self):
        return CycRational(self.conductor, -self.poly)

    def __sub__(self, other):
        return self + (-CycRational.coerce(other))

    def __rsub__(self, other):
        return CycRational.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, flint.fmpq)):
            return CycRational(self.conductor, self.poly * _as_fmpq(other))
        other = CycRational.coerce(other)
        m, a, b = self._align(other)
        prod = a * b
        if m > 1 and prod.degree() >= _totient(m):
            prod = prod % _cyclotomic(m)
        return CycRational(m, prod)

    __rmul__ = __mul__

    def inverse(self) -> "CycRational":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if self.poly.degree() == 0:
            return CycRational(self.conductor, flint.fmpq_poly([1 / self.poly[0]]))
        g, s, _ = self.poly.xgcd(_cyclotomic(self.conductor))
        return CycRational(self.conductor, (s / g[0]) % _cyclotomic(self.conductor))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, flint.fmpq)):
            return CycRational(self.conductor, self.poly / _as_fmpq(other))
        return self * CycRational.coerce(other).inverse()

    def __rtruediv__(self, other):
        return CycRational.coerce(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = CycRational.rational(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, flint.fmpq)):
            other = CycRational.rational(other)
        if not isinstance(other, CycRational):
            return NotImplemented
        _, a, b = self._align(other)
        return a == b

    __hash__ = None

    def __repr__(self):
        return f"CycRational({self.conductor}, {self})"

    def __str__(self):
        if self.is_rational():
            return _frac_str(self.to_fraction())
        parts = []
        for i, c in enumerate(self.poly.coeffs()):
            if c == 0:
                continue
            c = Fraction(int(c.p), int(c.q))
            if i == 0:
                parts.append(_frac_str(c))
            else:
                z = f"z{self.conductor}" + (f"^{i}" if i > 1 else "")
                parts.append(z if c == 1 else f"-{z}" if c == -1 else f"{_frac_str(c)}*{z}")
        return "(" + " + ".join(parts).replace("+ -", "- ") + ")"

    def to_json(self):
        if self.is_rational():
            return _frac_str(self.to_fraction())
        r = self.reduced()
        return {"conductor": r.conductor, "coords": [_frac_str(c) for c in r.coords]}

    @classmethod
    def from_json(cls, data) -> "CycRational":
        if isinstance(data, (str, int)):
            return cls.rational(Fraction(data))
        return cls.from_coords(data["conductor"], [Fraction(c) for c in data["coords"]])


def _frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@lru_cache(maxsize=4096)
def _root_of_unity_cached(m: int, j: int) -> CycRational:
    j %= m
    if j == 0:
        return CycRational.rational(1)
    g = math.gcd(j, m)
    m, j = m // g, j // g
    if m == 2:
        return CycRational.rational(-1)
    sign = 1
    if m % 4 == 2:
        # zeta_{2h} = -zeta_h^((h+1)/2) for odd h
        h = m // 2
        sign = -1 if j % 2 else 1
        j = (j * (h + 1) // 2) % h
        m = h
    poly = _monomial_mod(m, j)
    return CycRational(m, poly if sign == 1 else -poly)


def root_of_unity(m: int, j: int = 1) -> CycRational:
    """zeta_m^j with zeta_m = exp(2 pi i / m)."""
    return _root_of_unity_cached(m, j % m)


# -------------------------------------------------------------------- series


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class PuiseuxSeries:
    """Truncated series sum c_n q^(n/denom) + O(q^prec).

    ``terms`` maps integer numerators n to nonzero :class:`CycRational`
    coefficients; every stored exponent n/denom is below ``prec`` and all
    exponents below ``prec`` that are absent have coefficient zero.
    """

    __slots__ = ("denom", "prec", "terms", "_conductor")

    def __init__(self, denom: int, terms: Mapping[int, CycRational], prec, *, normalize: bool = True):
        prec = _frac(prec)
        clean = {}
        for n, c in terms.items():
            if Fraction(n, denom) < prec and not c.is_zero():
                clean[n] = c
        if normalize and clean:
            g = denom
            for n in clean:
                g = math.gcd(g, n)
                if g == 1:
                    break
            if g > 1:
                denom //= g
                clean = {n // g: c for n, c in clean.items()}
        elif normalize and not clean:
            denom = 1
        self.denom = denom
        self.prec = prec
        self.terms = dict(sorted(clean.items()))
        cond = 1
        for c in clean.values():
            if c.conductor != cond and c.conductor % cond == 0:
                cond = c.conductor
            elif c.conductor != cond:
                cond = _lcm(cond, c.conductor)
        self._conductor = cond

    # constructors ------------------------------------------------------
    @classmethod
    def zero(cls, prec) -> "PuiseuxSeries":
        return cls(1, {}, prec)

    @classmethod
    def constant(cls, c, prec) -> "PuiseuxSeries":
        return cls(1, {0: CycRational.coerce(c)}, prec)

    @classmethod
    def from_integer_coeffs(cls, coeffs: Iterable, prec=None, offset: int = 0) -> "PuiseuxSeries":
        """Series sum coeffs[i] q^(offset+i); precision defaults to the list length."""
        coeffs = list(coeffs)
        if prec is None:
            prec = offset + len(coeffs)
        return cls(1, {offset + i: CycRational.coerce(c) for i, c in enumerate(coeffs) if c}, prec)

    @classmethod
    def monomial(cls, exponent, coeff=1, prec=None) -> "PuiseuxSeries":
        exponent = _frac(exponent)
        if prec is None:
            prec = exponent + 1
        return cls(exponent.denominator, {exponent.numerator: CycRational.coerce(coeff)}, prec)

    # views -------------------------------------------------------------
    @property
    def conductor(self) -> int:
        return self._conductor

    def is_zero(self) -> bool:
        return not self.terms

    def valuation(self) -> Fraction:
        """Lowest exponent with a nonzero coefficient, or ``prec`` for a zero series."""
        if not self.terms:
            return self.prec
        return Fraction(next(iter(self.terms)), self.denom)

    def items(self):
        """(exponent, coefficient) pairs in increasing exponent order."""
        return [(Fraction(n, self.denom), c) for n, c in self.terms.items()]

    def coefficient(self, exponent) -> CycRational:
        exponent = _frac(exponent)
        if exponent >= self.prec:
            raise ValueError(f"exponent {exponent} is beyond the precision {self.prec}")
        scaled = exponent * self.denom
        if scaled.denominator != 1:
            return CycRational.rational(0)
        return self.terms.get(int(scaled), CycRational.rational(0))

    def truncate(self, prec) -> "PuiseuxSeries":
        prec = min(_frac(prec), self.prec)
        return PuiseuxSeries(self.denom, self.terms, prec)

    def with_denom(self, denom: int) -> dict[int, CycRational]:
        if denom % self.denom:
            raise ValueError("denominator must be a multiple of the current one")
        k = denom // self.denom
        return {n * k: c for n, c in self.terms.items()}

    # comparison --------------------------------------------------------
    def agrees_with(self, other: "PuiseuxSeries", prec=None) -> bool:
        """Equality of all coefficients below the shared precision."""
        shared = min(self.prec, other.prec)
        if prec is not None:
            shared = min(shared, _frac(prec))
        diff = qs_add(self, -other).truncate(shared)
        return diff.is_zero()

    def __eq__(self, other):
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        return self.agrees_with(other)

    __hash__ = None

    def digest(self) -> str:
        """Stable textual fingerprint of the stored data."""
        parts = [f"{self.denom}", str(self.prec)]
        for n, c in self.terms.items():
            c = c.reduced()
            parts.append(f"{n}:{c.conductor}:{','.join(map(str, c.coords))}")
        return "|".join(parts)

    # arithmetic --------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, PuiseuxSeries):
            other = PuiseuxSeries.constant(other, self.prec)
        return qs_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxSeries(self.denom, {n: -c for n, c in self.terms.items()}, self.prec, normalize=False)

    def __sub__(self, other):
        if not isinstance(other, PuiseuxSeries):
            other = PuiseuxSeries.constant(other, self.prec)
        return qs_add(self, -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PuiseuxSeries):
            return qs_mul(self, other)
        c = CycRational.coerce(other)
        if c.is_zero():
            return PuiseuxSeries.zero(self.prec)
        return PuiseuxSeries(self.denom, {n: v * c for n, v in self.terms.items()}, self.prec, normalize=False)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PuiseuxSeries):
            return qs_div(self, other)
        return self * CycRational.coerce(other).inverse()

    def __pow__(self, e: int):
        if e < 0:
            return qs_inverse(self) ** (-e)
        result = None
        base = self
        while e:
            if e & 1:
                result = base if result is None else qs_mul(result, base)
            e >>= 1
            if e:
                base = qs_mul(base, base)
        if result is None:
            # an empty product keeps the relative precision of the base
            return PuiseuxSeries.constant(1, self.prec - self.valuation())
        return result

    def __repr__(self):
        return f"PuiseuxSeries({format_series(self)})"

    def __str__(self):
        return format_series(self)

    # serialization -----------------------------------------------------
    def to_json(self) -> dict:
        return {
            "denom": self.denom,
            "prec": _frac_str(self.prec),
            "terms": [[n, c.to_json()] for n, c in self.terms.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "PuiseuxSeries":
        terms = {int(n): CycRational.from_json(c) for n, c in data["terms"]}
        return cls(int(data["denom"]), terms, Fraction(data["prec"]))


def format_series(s: PuiseuxSeries, show_precision: bool = False) -> str:
    """Canonical text: '1/240 + q + 9q^2', fractional exponents as 'q^(a/b)'."""
    out = []
    for e, c in s.items():
        if e == 0:
            mono = ""
        elif e == 1:
            mono = "q"
        elif e.denominator == 1:
            mono = f"q^{e.numerator}"
        else:
            mono = f"q^({e.numerator}/{e.denominator})"
        if c.is_rational():
            v = c.to_fraction()
            sign = "-" if v < 0 else "+"
            mag = abs(v)
            if mono and mag == 1:
                body = mono
            else:
                body = _frac_str(mag) + mono
        else:
            sign = "+"
            body = f"{c}{mono}" if mono else str(c)
        out.append((sign, body))
    if not out:
        text = "0"
    else:
        text = ("-" if out[0][0] == "-" else "") + out[0][1]
        for sign, body in out[1:]:
            text += f" {sign} {body}"
    if show_precision:
        p = s.prec
        text += f" + O(q^{p.numerator})" if p.denominator == 1 else f" + O(q^({p.numerator}/{p.denominator}))"
    return text


# ---------------------------------------------------------- series kernels


def qs_add(a: PuiseuxSeries, b: PuiseuxSeries) -> PuiseuxSeries:
    prec = min(a.prec, b.prec)
    m = _lcm(a.denom, b.denom)
    terms = dict(a.with_denom(m))
    for n, c in b.with_denom(m).items():
        if n in terms:
            terms[n] = terms[n] + c
        else:
            terms[n] = c
    return PuiseuxSeries(m, terms, prec)


def _pack(terms: Mapping[int, CycRational], conductor: int, lo: int, width: int) -> flint.fmpq_poly:
    """Kronecker packing of a series with cyclotomic coefficients into one polynomial."""
    coeffs: list = []
    for n, c in terms.items():
        p = c.embed(conductor).poly if c.conductor != conductor else c.poly
        base = (n - lo) * width
        if len(coeffs) < base + width:
            coeffs.extend([0] * (base + width - len(coeffs)))
        for j, v in enumerate(p.coeffs()):
            coeffs[base + j] = v
    return flint.fmpq_poly(coeffs)


def qs_mul(a: PuiseuxSeries, b: PuiseuxSeries) -> PuiseuxSeries:
    va, vb = a.valuation(), b.valuation()
    prec = min(a.prec + vb, b.prec + va)
    if a.is_zero() or b.is_zero():
        return PuiseuxSeries.zero(prec)
    m = _lcm(a.denom, b.denom)
    ta, tb = a.with_denom(m), b.with_denom(m)
    cond = _lcm(a.conductor, b.conductor)
    phi = _totient(cond)
    width = 2 * phi - 1
    lo_a, lo_b = next(iter(ta)), next(iter(tb))
    # exponents n with (lo_a + lo_b + i)/m < prec are kept
    limit = prec * m - lo_a - lo_b
    nterms = math.ceil(limit)
    if nterms <= 0:
        return PuiseuxSeries.zero(prec)
    pa = _pack(ta, cond, lo_a, width)
    pb = _pack(tb, cond, lo_b, width)
    prod = pa.mul_low(pb, nterms * width)
    raw = prod.coeffs()
    terms = {}
    cyc = _cyclotomic(cond)
    for i in range(nterms):
        chunk = raw[i * width:(i + 1) * width]
        if not chunk or not any(chunk):
            continue
        p = flint.fmpq_poly(chunk)
        if cond > 1 and p.degree() >= phi:
            p = p % cyc
        if not p.is_zero():
            terms[lo_a + lo_b + i] = CycRational(cond, p)
    return PuiseuxSeries(m, terms, prec)


def qs_theta(a: PuiseuxSeries) -> PuiseuxSeries:
    """theta = q d/dq: c q^e -> e c q^e."""
    return PuiseuxSeries(a.denom, {n: c * Fraction(n, a.denom) for n, c in a.terms.items()}, a.prec)


def qs_inverse(b: PuiseuxSeries) -> PuiseuxSeries:
    if b.is_zero():
        raise DivisionByZeroSeries("series has no nonzero term within its precision")
    v = b.valuation()
    rel = b.prec - v
    lead = b.terms[next(iter(b.terms))]
    # unit u = b / (lead q^v), leading term 1
    shift = next(iter(b.terms))
    inv_lead = lead.inverse()
    u = PuiseuxSeries(b.denom, {n - shift: c * inv_lead for n, c in b.terms.items()}, rel, normalize=False)
    # Newton iteration y <- y + y (1 - u y); y is treated as an exact polynomial
    # approximant whose error doubles in order at each step
    y = PuiseuxSeries.constant(1, rel)
    cur = Fraction(1, b.denom)
    while cur < rel:
        cur = min(2 * cur, rel)
        y = PuiseuxSeries(y.denom, y.terms, cur)
        err = qs_add(PuiseuxSeries.constant(1, cur), -qs_mul(u.truncate(cur), y))
        y = qs_add(y, qs_mul(y, err))
    y = y.truncate(rel)
    out = PuiseuxSeries(y.denom, y.terms, rel) * inv_lead
    m = _lcm(out.denom, v.denominator)
    sh = -v * m
    return PuiseuxSeries(m, {n + int(sh): c for n, c in out.with_denom(m).items()}, rel - v)


def qs_div(a: PuiseuxSeries, b: PuiseuxSeries) -> PuiseuxSeries:
    if b.is_zero():
        raise DivisionByZeroSeries("series has no nonzero term within its precision")
    return qs_mul(a, qs_inverse(b))


def qs_compose_affine(a: PuiseuxSeries, ratio, shift) -> PuiseuxSeries:
    """Substitute z -> ratio*z + shift, i.e. q^e -> exp(2 pi i e shift) q^(e ratio)."""
    ratio, shift = _frac(ratio), _frac(shift)
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    m = a.denom * ratio.denominator
    terms = {}
    for n, c in a.terms.items():
        phase = Fraction(n, a.denom) * shift
        coeff = c if phase.numerator == 0 else c * root_of_unity(phase.denominator, phase.numerator)
        terms[n * ratio.numerator] = coeff
    return PuiseuxSeries(m, terms, a.prec * ratio)


def qs_compose_scale(a: PuiseuxSeries, r, root: tuple[int, int] = (0, 1)) -> PuiseuxSeries:
    """Substitution q -> zeta_d^b q^r realising z -> r z + b/d."""
    b, d = root
    return qs_compose_affine(a, r, Fraction(b, d))
