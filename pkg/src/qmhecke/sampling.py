"""Seeded random forms, operators and towers for identity checks."""

from __future__ import annotations

import random
from fractions import Fraction

from .forms import FormExpr, eisenstein_level_form, level_one_monomial_form, level_one_monomials
from .heckealg import IDENTITY, TwistedHeckeOp, make_op, tn_op
from .lattice import CongruenceLevel, Mat2Q, translation
from .quasimod import QuasiModularForm, g2_power
from .twisted import GradedTower


def random_scalar(rng: random.Random) -> Fraction:
    return Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 1, 2, 3]))


def random_modular(rng: random.Random, weight: int, level: int = 1) -> FormExpr:
    """A random combination of G4^a G6^b, plus a level-N Eisenstein term when N > 1."""
    out = FormExpr.zero()
    basis = level_one_monomials(weight)
    for a, b in rng.sample(basis, min(len(basis), 2)):
        out = out + level_one_monomial_form(a, b) * random_scalar(rng)
    if level > 1 and weight >= 4:
        c, d = rng.randrange(level), rng.randrange(level)
        if (c, d) == (0, 0):
            d = 1
        rest = level_one_monomials(weight - 4)
        if rest:
            a, b = rng.choice(rest)
            out = out + eisenstein_level_form(4, c, d, level) * level_one_monomial_form(a, b) * random_scalar(rng)
    if out.is_zero() and weight == 0:
        out = FormExpr.constant(random_scalar(rng))
    return out


def random_qm(rng: random.Random, weight: int, level: int = 1, max_depth: int = 2) -> QuasiModularForm:
    """A random quasimodular form of the given weight and depth at most max_depth."""
    out = QuasiModularForm.zero(weight, level)
    for i in range(min(max_depth, weight // 2) + 1):
        if rng.random() < 0.3 and i:
            continue
        coeff = random_modular(rng, weight - 2 * i, level)
        if not coeff.is_zero():
            out = out + QuasiModularForm.modular(coeff, level, weight - 2 * i) * g2_power(i, level)
    if out.is_zero():
        out = g2_power(weight // 2, level) if weight else QuasiModularForm.constant(1, level)
    return out.with_level(level)


def random_matrix(rng: random.Random, level: int, dets=(1, 2, 3)) -> Mat2Q:
    n = rng.choice(dets)
    a = rng.choice([x for x in range(1, n + 1) if n % x == 0])
    d = n // a
    b = rng.randrange(d)
    u = rng.choice(CongruenceLevel(level).coset_reps()) if level > 1 else IDENTITY
    return u @ Mat2Q.of(a, b, 0, d)


def random_op(
    rng: random.Random,
    level: int = 1,
    twist: Mat2Q = IDENTITY,
    weight: int = 4,
    bases: int = 2,
    dets=(1, 2, 3),
    max_depth: int = 2,
    unimodular_base: bool = False,
) -> TwistedHeckeOp:
    """Sum of orbit closures of values w || (alpha sigma^-1), which are always covariant.

    With ``unimodular_base`` the first orbit sits over SL2(Z), so products that only
    read the left factor there (the pairing and the restricted product) are not empty.
    """
    twist_inv = twist.inverse()
    op = TwistedHeckeOp(level, twist)

    def orbit(alpha):
        w = random_qm(rng, weight, level, max_depth)
        return make_op(level, twist, [(alpha, w.dslash(alpha @ twist_inv))], samples=4, seed=rng.randrange(2**31))

    for i in range(bases):
        op = op + orbit(random_matrix(rng, level, (1,) if unimodular_base and i == 0 else dets))
    # later orbits can cancel the unimodular one
    while unimodular_base and not any(key.in_sl2z() for key in op.support()):
        op = op + orbit(random_matrix(rng, level, (1,)))
    return op


def random_generated_op(rng: random.Random, level: int = 1) -> TwistedHeckeOp:
    """One of tn_op(2), tn_op(3), or an orbit closure with value G2 or G4."""
    from .forms import eisenstein

    choice = rng.randrange(4)
    if choice == 0:
        return tn_op(2, level)
    if choice == 1:
        return tn_op(3, level)
    value = g2_power(1, level) if choice == 2 else QuasiModularForm.modular(eisenstein(4), level)
    alpha = random_matrix(rng, level, (2, 3))
    return make_op(level, IDENTITY, [(alpha, value)], samples=4, seed=rng.randrange(2**31)) * random_scalar(rng)


def random_tower(
    rng: random.Random,
    sigma: Mat2Q,
    level: int = 1,
    degrees=(0, 1),
    weight: int = 4,
) -> GradedTower:
    # weight 2 would only give multiples of G2, which X annihilates
    comps = {}
    for m in degrees:
        twist = translation(m) @ sigma
        comps[m] = random_op(rng, level, twist, weight=weight, bases=2, dets=(1, 2), max_depth=1, unimodular_base=True)
    return GradedTower(sigma, level, comps)


__all__ = [
    "random_scalar",
    "random_modular",
    "random_qm",
    "random_matrix",
    "random_op",
    "random_generated_op",
    "random_tower",
]
