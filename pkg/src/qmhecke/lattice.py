"""Rational 2x2 matrices and left cosets of principal congruence subgroups.

Every m in GL2+(Q) factors uniquely as m = U * r * H with U in SL2(Z), r a
positive rational and H = (a b; 0 d) primitive with a, d > 0 and 0 <= b < d.
The left coset Gamma(N) m is then named by (r, H, U mod N).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, NamedTuple

from .errors import GuardExceeded, NotPositiveDet

DEFAULT_ORBIT_GUARD = 20_000


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True, slots=True)
class Mat2Q:
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    @classmethod
    def of(cls, a, b, c, d) -> "Mat2Q":
        return cls(_q(a), _q(b), _q(c), _q(d))

    @classmethod
    def identity(cls) -> "Mat2Q":
        return _IDENTITY

    @classmethod
    def upper(cls, a, b, d) -> "Mat2Q":
        return cls.of(a, b, 0, d)

    @classmethod
    def scalar(cls, r) -> "Mat2Q":
        return cls.of(r, 0, 0, r)

    def __matmul__(self, o: "Mat2Q") -> "Mat2Q":
        return Mat2Q(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def __mul__(self, r) -> "Mat2Q":
        r = _q(r)
        return Mat2Q(self.a * r, self.b * r, self.c * r, self.d * r)

    __rmul__ = __mul__

    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    def inverse(self) -> "Mat2Q":
        det = self.det()
        if det == 0:
            raise ZeroDivisionError("singular matrix")
        return Mat2Q(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def entries(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c, self.d)

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for x in self.entries())

    def is_unimodular(self) -> bool:
        return self.is_integral() and self.det() == 1

    def is_upper_triangular(self) -> bool:
        return self.c == 0

    def int_entries(self) -> tuple[int, int, int, int]:
        if not self.is_integral():
            raise ValueError("matrix is not integral")
        return tuple(int(x) for x in self.entries())

    def mod(self, n: int) -> tuple[int, int, int, int]:
        return tuple(int(x) % n for x in self.int_entries())

    def to_json(self) -> list[str]:
        return [str(x) for x in self.entries()]

    @classmethod
    def from_json(cls, data) -> "Mat2Q":
        return cls.of(*(Fraction(x) for x in data))

    def __str__(self) -> str:
        return "(" + " ".join(str(x) for x in (self.a, self.b)) + "; " + " ".join(str(x) for x in (self.c, self.d)) + ")"


_IDENTITY = Mat2Q.of(1, 0, 0, 1)

S_MATRIX = Mat2Q.of(0, -1, 1, 0)
T_MATRIX = Mat2Q.of(1, 1, 0, 1)


def translation(n: int) -> Mat2Q:
    """rho_n = (1 n; 0 1)."""
    return Mat2Q.of(1, n, 0, 1)


# --------------------------------------------------------------- arithmetic


def ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


class Decomposition(NamedTuple):
    unimodular: Mat2Q
    scale: Fraction
    hnf: tuple[int, int, int]

    @property
    def upper(self) -> Mat2Q:
        a, b, d = self.hnf
        return Mat2Q.of(a, b, 0, d) * self.scale


def hnf_matrix(hnf: tuple[int, int, int]) -> Mat2Q:
    a, b, d = hnf
    return Mat2Q.of(a, b, 0, d)


@lru_cache(maxsize=200_000)
def _decompose_cached(entries: tuple[Fraction, Fraction, Fraction, Fraction]) -> Decomposition:
    m = Mat2Q(*entries)
    det = m.det()
    if det <= 0:
        raise NotPositiveDet(f"determinant {det} of {m} is not positive")
    den = 1
    for x in entries:
        den = den * x.denominator // math.gcd(den, x.denominator)
    p, x, q, y = (int(e * den) for e in entries)
    g, s, t = ext_gcd(p, q)
    # V = (s t; -q/g p/g) sends the first column to (g, 0)
    top = s * x + t * y
    bottom = (p * y - q * x) // g
    k = top // bottom
    top -= k * bottom
    content = math.gcd(math.gcd(g, top), bottom)
    hnf = (g // content, top // content, bottom // content)
    scale = Fraction(content, den)
    # W = (1 -k; 0 1) V, and m' = W^{-1} T' so U = W^{-1}
    w = Mat2Q.of(s + k * q // g, t - k * p // g, -q // g, p // g)
    unimodular = w.inverse()
    return Decomposition(unimodular, scale, hnf)


def hnf_decompose(m: Mat2Q) -> Decomposition:
    """Factor m = U * r * H with U in SL2(Z) and H canonical upper triangular."""
    return _decompose_cached(m.entries())


# ------------------------------------------------------------- coset keys


@dataclass(frozen=True, order=True, slots=True)
class CosetKey:
    """Name of the left coset Gamma(N) * U * r * H."""

    scale: Fraction
    hnf: tuple[int, int, int]
    uclass: tuple[int, int, int, int]
    level: int

    def to_json(self) -> dict:
        return {
            "scale": str(self.scale),
            "hnf": list(self.hnf),
            "uclass": list(self.uclass),
            "N": self.level,
        }

    @classmethod
    def from_json(cls, data) -> "CosetKey":
        return cls(Fraction(data["scale"]), tuple(data["hnf"]), tuple(data["uclass"]), int(data["N"]))

    def det(self) -> Fraction:
        a, _, d = self.hnf
        return self.scale**2 * a * d

    def in_sl2z(self) -> bool:
        return self.scale == 1 and self.hnf == (1, 0, 1)


def coset_key(m: Mat2Q, level: "CongruenceLevel | int") -> CosetKey:
    n = level.N if isinstance(level, CongruenceLevel) else int(level)
    dec = hnf_decompose(m)
    uclass = dec.unimodular.mod(n) if n > 1 else (0, 0, 0, 0)
    return CosetKey(dec.scale, dec.hnf, uclass, n)


def reconstruct(key: CosetKey) -> Mat2Q:
    u = lift_sl2(key.uclass, key.level) if key.level > 1 else _IDENTITY
    return u @ (hnf_matrix(key.hnf) * key.scale)


def gamma_membership(m: Mat2Q, level: "CongruenceLevel | int") -> bool:
    n = level.N if isinstance(level, CongruenceLevel) else int(level)
    if not m.is_integral() or m.det() != 1:
        return False
    return n == 1 or m.mod(n) == (1, 0, 0, 1)


# ------------------------------------------------------------ SL2(Z/M)


def sl2_order(n: int) -> int:
    """|SL2(Z/n)| = n^3 prod_{p | n} (1 - 1/p^2)."""
    order = Fraction(n**3)
    for p in _prime_divisors(n):
        order *= 1 - Fraction(1, p * p)
    return int(order)


def _prime_divisors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=100_000)
def lift_sl2(cls: tuple[int, int, int, int], m: int) -> Mat2Q:
    """A fixed integral lift to SL2(Z) of a class (a b; c d) in SL2(Z/m)."""
    if m == 1:
        return _IDENTITY
    a, b, c, d = (x % m for x in cls)
    if (a * d - b * c) % m != 1 % m:
        raise ValueError(f"{cls} is not in SL2(Z/{m})")
    if (a, b, c, d) == (1 % m, 0, 0, 1 % m):
        return _IDENTITY
    if c == 0:
        c = m
    t = 0
    while math.gcd(c, d + t * m) != 1:
        t += 1
    d = d + t * m
    g, u, v = ext_gcd(d, c)  # u d + v c = 1
    a0, b0 = u, -v
    k = (v * (a - a0) + u * (b - b0)) % m
    a1, b1 = a0 + k * c, b0 + k * d
    lifted = Mat2Q.of(a1, b1, c, d)
    assert lifted.det() == 1 and lifted.mod(m) == tuple(x % m for x in cls)
    return lifted


def _solve_linear_congruence(a: int, b: int, m: int) -> list[int]:
    """All x mod m with a x = b (mod m)."""
    g = math.gcd(a, m)
    if b % g:
        return []
    mg = m // g
    x0 = ((b // g) * pow(a // g, -1, mg)) % mg if mg > 1 else 0
    return [x0 + i * mg for i in range(g)]


def congruence_kernel(m: int, n: int) -> Iterator[tuple[int, int, int, int]]:
    """Elements of SL2(Z/m) congruent to the identity mod n (n | m), in a fixed order."""
    if m % n:
        raise ValueError("n must divide m")
    k = m // n
    for i in range(k):
        a = (1 + n * i) % m
        for j in range(k):
            b = (n * j) % m
            for l_ in range(k):
                c = (n * l_) % m
                # a (1 + n t) - b c = 1 (mod m)
                for t in _solve_linear_congruence(a * n, (1 - a + b * c) % m, m):
                    if t < k:
                        yield (a, b, c, (1 + n * t) % m)


@dataclass(frozen=True)
class CongruenceLevel:
    """The principal congruence subgroup Gamma(N) and its quotient SL2(Z/N)."""

    N: int
    guard: int = DEFAULT_ORBIT_GUARD

    def order(self) -> int:
        return sl2_order(self.N)

    def quotient_elements(self) -> list[tuple[int, int, int, int]]:
        return _sl2_elements(self.N)

    def coset_reps(self) -> list[Mat2Q]:
        """Representatives of Gamma(N) \\ SL2(Z), one per class mod N."""
        return _coset_reps(self.N)

    def contains(self, m: Mat2Q) -> bool:
        return gamma_membership(m, self.N)

    def random_element(self, rng: random.Random, length: int = 6) -> Mat2Q:
        """A random element of Gamma(N) from a random word in S and T."""
        w = _IDENTITY
        for _ in range(length):
            g = rng.choice((S_MATRIX, T_MATRIX, T_MATRIX.inverse()))
            w = w @ g
            if rng.random() < 0.5:
                w = w @ Mat2Q.of(1, rng.randint(-2, 2), 0, 1)
        if self.N == 1:
            return w
        # w * lift(w mod N)^{-1} is congruent to the identity mod N
        return w @ lift_sl2(w.mod(self.N), self.N).inverse()


@lru_cache(maxsize=None)
def _sl2_elements(n: int) -> list[tuple[int, int, int, int]]:
    if n == 1:
        return [(0, 0, 0, 0)]
    out = []
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    if (a * d - b * c) % n == 1:
                        out.append((a, b, c, d))
    return out


@lru_cache(maxsize=None)
def _coset_reps(n: int) -> list[Mat2Q]:
    return [lift_sl2(e, n) for e in _sl2_elements(n)]


def hecke_hnfs(n: int) -> list[tuple[int, int, int]]:
    """All (a, b, d) with a d = n and 0 <= b < d, not necessarily primitive."""
    out = []
    for a in range(1, n + 1):
        if n % a == 0:
            d = n // a
            out.extend((a, b, d) for b in range(d))
    return out


def hecke_coset_reps(n: int, level: "CongruenceLevel | int", guard: int = DEFAULT_ORBIT_GUARD) -> list[CosetKey]:
    """Left cosets Gamma(N) \\ {integral matrices of determinant n}."""
    lvl = level if isinstance(level, CongruenceLevel) else CongruenceLevel(int(level), guard)
    hnfs = hecke_hnfs(n)
    if len(hnfs) * lvl.order() > lvl.guard:
        raise GuardExceeded(f"{len(hnfs) * lvl.order()} cosets exceed guard {lvl.guard}")
    keys = {coset_key(u @ Mat2Q.of(a, b, 0, d), lvl) for (a, b, d) in hnfs for u in lvl.coset_reps()}
    return sorted(keys)


def orbit_modulus(m: Mat2Q, level: int) -> int:
    """M such that Gamma(M) fixes the left coset Gamma(level) m under right multiplication."""
    a, _, d = hnf_decompose(m).hnf
    return level * a * d


class Orbit(NamedTuple):
    points: dict  # CosetKey -> witness in Gamma(N)
    stabilizer: list  # witnesses gamma with Gamma m gamma = Gamma m


@lru_cache(maxsize=4096)
def _orbit_cached(entries, n: int, guard: int) -> Orbit:
    rep = Mat2Q(*entries)
    mod = orbit_modulus(rep, n)
    size = sl2_order(mod) // sl2_order(n)
    if size > guard:
        raise GuardExceeded(f"orbit quotient of size {size} exceeds guard {guard}")
    home = coset_key(rep, n)
    points: dict = {}
    stab: list = []
    for cls in congruence_kernel(mod, n):
        gamma = lift_sl2(cls, mod)
        key = coset_key(rep @ gamma, n)
        if key not in points:
            points[key] = gamma
        if key == home:
            stab.append(gamma)
    return Orbit(dict(sorted(points.items())), stab)


def orbit_data(rep: Mat2Q, level: "CongruenceLevel | int") -> Orbit:
    lvl = level if isinstance(level, CongruenceLevel) else CongruenceLevel(int(level))
    return _orbit_cached(rep.entries(), lvl.N, lvl.guard)


def right_orbit(key: CosetKey, level: "CongruenceLevel | int") -> list[tuple[CosetKey, Mat2Q]]:
    """The left cosets Gamma rep gamma (gamma in Gamma(N)) with one witness each."""
    return list(orbit_data(reconstruct(key), level).points.items())
