"""Quasimodular Hecke operators: covariant finitely supported coset functions.

An operator stores its value on every left coset Gamma(N) alpha of its
support, keyed by :class:`CosetKey`.  Values on a right Gamma(N)-orbit are
tied together by covariance ``F_{alpha gamma} = F_alpha || sigma gamma sigma^-1``
where sigma is the twist (identity for the untwisted algebra).
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .errors import CovarianceViolation, DepthNotZero, LevelMismatch, NotUnimodular, TwistMismatch
from .forms import FormExpr, mu_expr, nu_expr
from .lattice import (
    DEFAULT_ORBIT_GUARD,
    CongruenceLevel,
    CosetKey,
    Mat2Q,
    coset_key,
    hecke_coset_reps,
    orbit_data,
    orbit_modulus,
    reconstruct,
)
from .quasimod import (
    QuasiModularForm,
    op_D,
    op_E,
    op_T,
    op_W,
    op_X,
    op_Y,
    qm_dslash,
    qm_scale_by_form,
)

DEFAULT_SAMPLES = 25
IDENTITY = Mat2Q.identity()


def _check_twist(twist: Mat2Q) -> Mat2Q:
    if not twist.is_unimodular():
        raise NotUnimodular(f"twist {twist} is not in SL2(Z)")
    return twist


class TwistedHeckeOp:
    """A finitely supported function on Gamma(N) \\ GL2+(Q) with twisted covariance."""

    __slots__ = ("level", "twist", "table")

    def __init__(self, level: int, twist: Mat2Q = IDENTITY, table: Mapping[CosetKey, QuasiModularForm] | None = None):
        self.level = int(level)
        self.twist = _check_twist(twist)
        clean = {}
        for key, value in (table or {}).items():
            if key.level != self.level:
                raise LevelMismatch(f"key of level {key.level} in an operator of level {self.level}")
            if not value.is_zero():
                clean[key] = value.with_level(self.level)
        self.table = dict(sorted(clean.items()))

    # views -------------------------------------------------------------
    @property
    def weight(self) -> int | None:
        weights = {v.weight for v in self.table.values()}
        if len(weights) > 1:
            raise ValueError(f"operator values have mixed weights {sorted(weights)}")
        return weights.pop() if weights else None

    def support(self) -> list[CosetKey]:
        return list(self.table)

    def items(self):
        return self.table.items()

    def is_zero(self) -> bool:
        return not self.table

    def value(self, key: CosetKey) -> QuasiModularForm:
        v = self.table.get(key)
        return v if v is not None else QuasiModularForm.zero(self.weight or 0, self.level)

    def evaluate(self, alpha: Mat2Q) -> QuasiModularForm:
        """F_alpha (zero off the support)."""
        return self.value(coset_key(alpha, self.level))

    def is_untwisted(self) -> bool:
        return self.twist == IDENTITY

    # linear structure --------------------------------------------------
    def _check_compatible(self, other: "TwistedHeckeOp"):
        if self.level != other.level:
            raise LevelMismatch(f"levels {self.level} and {other.level} differ")
        if self.twist != other.twist:
            raise TwistMismatch(f"twists {self.twist} and {other.twist} differ")

    def __add__(self, other: "TwistedHeckeOp") -> "TwistedHeckeOp":
        self._check_compatible(other)
        table = dict(self.table)
        for key, value in other.table.items():
            table[key] = table[key] + value if key in table else value
        return TwistedHeckeOp(self.level, self.twist, table)

    def __neg__(self):
        return TwistedHeckeOp(self.level, self.twist, {k: -v for k, v in self.table.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if not isinstance(c, (int, Fraction)):
            return NotImplemented
        return TwistedHeckeOp(self.level, self.twist, {k: v * c for k, v in self.table.items()})

    __rmul__ = __mul__

    def difference_witness(self, other: "TwistedHeckeOp", prec: int | None = None) -> CosetKey | None:
        """First coset where the two operators differ, or None."""
        self._check_compatible(other)
        for key in sorted(set(self.table) | set(other.table)):
            if not self.value(key).equals(other.value(key), prec):
                return key
        return None

    def equals(self, other: "TwistedHeckeOp", prec: int | None = None) -> bool:
        return self.difference_witness(other, prec) is None

    def __eq__(self, other):
        if isinstance(other, TwistedHeckeOp):
            return self.equals(other)
        return NotImplemented

    __hash__ = None

    def map_values(self, fn: Callable[[CosetKey, Mat2Q, QuasiModularForm], QuasiModularForm], twist: Mat2Q | None = None):
        table = {key: fn(key, reconstruct(key), value) for key, value in self.table.items()}
        return TwistedHeckeOp(self.level, self.twist if twist is None else twist, table)

    # serialization -----------------------------------------------------
    def to_json(self) -> dict:
        return {
            "level": self.level,
            "twist": [int(x) for x in self.twist.int_entries()],
            "support": [[key.to_json(), value.to_json()] for key, value in self.table.items()],
        }

    @classmethod
    def from_json(cls, data) -> "TwistedHeckeOp":
        twist = Mat2Q.of(*data.get("twist", [1, 0, 0, 1]))
        table = {CosetKey.from_json(k): QuasiModularForm.from_json(v) for k, v in data["support"]}
        return cls(int(data["level"]), twist, table)

    def __repr__(self):
        return f"TwistedHeckeOp(level={self.level}, twist={self.twist}, support={len(self.table)})"


# ------------------------------------------------------------ construction


def conjugate_by_twist(gamma: Mat2Q, twist: Mat2Q) -> Mat2Q:
    return twist @ gamma @ twist.inverse()


def make_op(
    level: int,
    twist: Mat2Q = IDENTITY,
    assignments: Iterable[tuple[Mat2Q, QuasiModularForm]] = (),
    *,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    guard: int = DEFAULT_ORBIT_GUARD,
) -> TwistedHeckeOp:
    """Close the assignments under covariance and check stabilizer consistency."""
    _check_twist(twist)
    lvl = CongruenceLevel(int(level), guard)
    rng = random.Random(seed)
    table: dict[CosetKey, QuasiModularForm] = {}
    for alpha, value in assignments:
        value = value.with_level(lvl.N)
        home = coset_key(alpha, lvl)
        rep = reconstruct(home)
        orbit = orbit_data(rep, lvl)
        stab = orbit.stabilizer if len(orbit.stabilizer) <= samples else rng.sample(orbit.stabilizer, samples)
        # Gamma(M) fixes the coset too but is invisible in the classes mod M
        deep = CongruenceLevel(orbit_modulus(rep, lvl.N))
        stab = stab + [deep.random_element(rng) for _ in range(samples)]
        for gamma in stab:
            if not qm_dslash(value, conjugate_by_twist(gamma, twist)).equals(value):
                raise CovarianceViolation(f"value at {home} is not fixed by stabilizer element {gamma}")
        for key, gamma in orbit.points.items():
            image = qm_dslash(value, conjugate_by_twist(gamma, twist))
            if key in table:
                if not table[key].equals(image):
                    raise CovarianceViolation(f"conflicting values assigned on the orbit of {home}")
                continue
            table[key] = image
    return TwistedHeckeOp(lvl.N, twist, table)


def check_covariance(F: TwistedHeckeOp, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> tuple | None:
    """Sample gamma in Gamma(N); return (key, gamma) where covariance fails, else None."""
    if F.is_zero():
        return None
    rng = random.Random(seed)
    lvl = CongruenceLevel(F.level)
    keys = F.support()
    for _ in range(samples):
        key = rng.choice(keys)
        gamma = lvl.random_element(rng)
        rep = reconstruct(key)
        lhs = F.evaluate(rep @ gamma)
        rhs = qm_dslash(F.value(key), conjugate_by_twist(gamma, F.twist))
        if not lhs.equals(rhs):
            return key, gamma
    return None


def identity_op(level: int = 1) -> TwistedHeckeOp:
    """The unit e: value 1 on the trivial coset only."""
    return TwistedHeckeOp(level, IDENTITY, {coset_key(IDENTITY, level): QuasiModularForm.constant(1, level)})


def tn_op(n: int, level: int = 1, guard: int = DEFAULT_ORBIT_GUARD) -> TwistedHeckeOp:
    """Constant value 1 on every left coset of integral matrices of determinant n."""
    keys = hecke_coset_reps(n, CongruenceLevel(int(level), guard))
    return TwistedHeckeOp(level, IDENTITY, {k: QuasiModularForm.constant(1, level) for k in keys})


def embed_modular(
    level: int,
    assignments: Iterable[tuple[Mat2Q, QuasiModularForm | FormExpr]],
    **kwargs,
) -> TwistedHeckeOp:
    """Embed a classical (depth-zero valued) Hecke operator."""
    values = []
    for alpha, value in assignments:
        if isinstance(value, FormExpr):
            value = QuasiModularForm.modular(value, level)
        if value.depth:
            raise DepthNotZero(f"value at {alpha} has depth {value.depth}")
        values.append((alpha, value))
    return make_op(level, IDENTITY, values, **kwargs)


def embed_op(F: TwistedHeckeOp) -> TwistedHeckeOp:
    """Check that an existing operator has depth-zero values and return it."""
    for key, value in F.items():
        if value.depth:
            raise DepthNotZero(f"value at {key} has depth {value.depth}")
    return F


# --------------------------------------------------------------- products


def _require_untwisted(*ops: TwistedHeckeOp):
    for op in ops:
        if not op.is_untwisted():
            raise TwistMismatch("operation needs untwisted operators")


def _require_level(*ops: TwistedHeckeOp) -> int:
    levels = {op.level for op in ops}
    if len(levels) != 1:
        raise LevelMismatch(f"levels {sorted(levels)} differ")
    return levels.pop()


def _accumulate(table: dict, key: CosetKey, value: QuasiModularForm):
    if value.is_zero():
        return
    table[key] = table[key] + value if key in table else value


def star(F: TwistedHeckeOp, G: TwistedHeckeOp) -> TwistedHeckeOp:
    """(F * G)_alpha = sum_beta F_beta (G_{alpha beta^-1} || beta)."""
    level = _require_level(F, G)
    _require_untwisted(F, G)
    table: dict = {}
    g_items = [(reconstruct(kg), vg) for kg, vg in G.items()]
    for kb, fb in F.items():
        beta = reconstruct(kb)
        for g, vg in g_items:
            _accumulate(table, coset_key(g @ beta, level), fb * qm_dslash(vg, beta))
    return TwistedHeckeOp(level, IDENTITY, table)


def star_r(F: TwistedHeckeOp, G: TwistedHeckeOp) -> TwistedHeckeOp:
    """The product restricting the sum to beta in Gamma(N) \\ SL2(Z)."""
    level = _require_level(F, G)
    _require_untwisted(F, G)
    table: dict = {}
    g_items = [(reconstruct(kg), vg) for kg, vg in G.items()]
    for kb, fb in F.items():
        if not kb.in_sl2z():
            continue
        beta = reconstruct(kb)
        for g, vg in g_items:
            _accumulate(table, coset_key(g @ beta, level), fb * qm_dslash(vg, beta))
    return TwistedHeckeOp(level, IDENTITY, table)


def act_on_form(F: TwistedHeckeOp, f: QuasiModularForm) -> QuasiModularForm:
    """F * f = sum_beta F_beta (f || beta)."""
    _require_untwisted(F)
    if f.level != F.level:
        raise LevelMismatch(f"form of level {f.level} against an operator of level {F.level}")
    out = QuasiModularForm.zero((F.weight or 0) + f.weight, F.level)
    for kb, fb in F.items():
        out = out + fb * qm_dslash(f, reconstruct(kb))
    return out


# ----------------------------------------------------------- lifted operators


def _pointwise(F: TwistedHeckeOp, fn: Callable[[QuasiModularForm], QuasiModularForm]) -> TwistedHeckeOp:
    return F.map_values(lambda key, rep, value: fn(value))


def _untwisted_rep(F: TwistedHeckeOp, rep: Mat2Q) -> Mat2Q:
    return rep if F.is_untwisted() else rep @ F.twist.inverse()


def lift_D(F):
    return _pointwise(F, op_D)


def lift_W(k: int, F):
    return _pointwise(F, lambda v: op_W(k, v))


def lift_E(F):
    return _pointwise(F, op_E)


def lift_T(k: int, l: int, F):
    return _pointwise(F, lambda v: op_T(k, l, v))


def lift_X(F):
    return _pointwise(F, op_X)


def lift_Y(F):
    return _pointwise(F, op_Y)


def lift_phi(m: int, F: TwistedHeckeOp) -> TwistedHeckeOp:
    """phi^(m)(F)_alpha = nu^(m)_{alpha sigma^-1} F_alpha."""
    return F.map_values(lambda key, rep, value: qm_scale_by_form(value, nu_expr(_untwisted_rep(F, rep), m)))


def iterated_derivative(f: FormExpr, times: int) -> FormExpr:
    for _ in range(times):
        f = f.derivative()
    return f


def lift_delta(n: int, F: TwistedHeckeOp) -> TwistedHeckeOp:
    """delta_n(F)_alpha = X^(n-1)(mu_{alpha sigma^-1}) F_alpha."""
    if n < 1:
        raise ValueError("delta_n needs n >= 1")
    return F.map_values(
        lambda key, rep, value: qm_scale_by_form(value, iterated_derivative(mu_expr(_untwisted_rep(F, rep)), n - 1))
    )


__all__ = [
    "TwistedHeckeOp",
    "make_op",
    "check_covariance",
    "identity_op",
    "tn_op",
    "embed_modular",
    "embed_op",
    "star",
    "star_r",
    "act_on_form",
    "lift_D",
    "lift_W",
    "lift_E",
    "lift_T",
    "lift_X",
    "lift_Y",
    "lift_phi",
    "lift_delta",
    "iterated_derivative",
    "conjugate_by_twist",
]
