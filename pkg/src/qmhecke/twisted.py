"""Twisted operators: the pairing, the right module, X_tau and the graded tower."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import NonCommutingTwists, NotUnimodular, TwistMismatch
from .heckealg import IDENTITY, TwistedHeckeOp, _accumulate, _require_level, lift_Y
from .lattice import CongruenceLevel, Mat2Q, coset_key, reconstruct, translation
from .quasimod import op_X, qm_dslash


def _sl2_reps(level: int) -> list[Mat2Q]:
    return CongruenceLevel(level).coset_reps()


def pair(F1: TwistedHeckeOp, F2: TwistedHeckeOp) -> TwistedHeckeOp:
    """(F1, F2)_alpha = sum over beta in Gamma \\ SL2(Z) of F1_{beta sigma} (F2_{alpha sigma^-1 beta^-1} || sigma beta)."""
    level = _require_level(F1, F2)
    if F1.twist != F2.twist:
        raise TwistMismatch(f"twists {F1.twist} and {F2.twist} differ")
    sigma = F1.twist
    table: dict = {}
    g_items = [(reconstruct(k), v) for k, v in F2.items()]
    for beta in _sl2_reps(level):
        f1 = F1.evaluate(beta @ sigma)
        if f1.is_zero():
            continue
        shift = sigma @ beta
        for g, v in g_items:
            _accumulate(table, coset_key(g @ beta @ sigma, level), f1 * qm_dslash(v, shift))
    return TwistedHeckeOp(level, sigma, table)


def right_act(F1: TwistedHeckeOp, F2: TwistedHeckeOp) -> TwistedHeckeOp:
    """(F1 * F2)_alpha = sum_beta F1_{beta sigma} (F2_{alpha sigma^-1 beta^-1} || beta)."""
    level = _require_level(F1, F2)
    if not F2.is_untwisted():
        raise TwistMismatch("the right factor must be untwisted")
    sigma_inv = F1.twist.inverse()
    table: dict = {}
    g_items = [(reconstruct(k), v) for k, v in F2.items()]
    for key, f1 in F1.items():
        rho = reconstruct(key)
        beta = rho @ sigma_inv
        for g, v in g_items:
            _accumulate(table, coset_key(g @ rho, level), f1 * qm_dslash(v, beta))
    return TwistedHeckeOp(level, F1.twist, table)


def x_tau(F: TwistedHeckeOp, tau: Mat2Q) -> TwistedHeckeOp:
    """X_tau(F)_alpha = X(F_alpha) || tau^-1, twist tau sigma."""
    if not tau.is_unimodular():
        raise NotUnimodular(f"{tau} is not in SL2(Z)")
    tau_inv = tau.inverse()
    return F.map_values(lambda key, rep, value: qm_dslash(op_X(value), tau_inv), twist=tau @ F.twist)


def twists_commute(t1: Mat2Q, t2: Mat2Q) -> bool:
    return t1 @ t2 == t2 @ t1


def graded_pair(F1: TwistedHeckeOp, F2: TwistedHeckeOp, tau1: Mat2Q, tau2: Mat2Q, sigma: Mat2Q) -> TwistedHeckeOp:
    """Pairing of a tau1 sigma-twisted and a tau2 sigma-twisted operator, twist tau1 tau2 sigma."""
    level = _require_level(F1, F2)
    if not twists_commute(tau1, tau2):
        raise NonCommutingTwists(f"{tau1} and {tau2} do not commute")
    if F1.twist != tau1 @ sigma or F2.twist != tau2 @ sigma:
        raise TwistMismatch("operator twists do not match tau1 sigma and tau2 sigma")
    t1_inv, t2_inv = tau1.inverse(), tau2.inverse()
    table: dict = {}
    g_items = [(reconstruct(k), v) for k, v in F2.items()]
    for beta in _sl2_reps(level):
        f1 = F1.evaluate(beta @ sigma)
        if f1.is_zero():
            continue
        left = qm_dslash(f1, t2_inv)
        shift = tau2 @ sigma @ beta @ t1_inv @ t2_inv
        for g, v in g_items:
            _accumulate(table, coset_key(g @ beta @ sigma, level), left * qm_dslash(v, shift))
    return TwistedHeckeOp(level, tau1 @ tau2 @ sigma, table)


# ------------------------------------------------------------------ tower


@dataclass(frozen=True)
class GradedTower:
    """Finitely many components m, the m-th twisted by rho_m sigma."""

    sigma: Mat2Q
    level: int
    components: Mapping[int, TwistedHeckeOp] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for m, op in sorted(self.components.items()):
            if op.level != self.level:
                raise TwistMismatch(f"component {m} has level {op.level}")
            if op.twist != translation(m) @ self.sigma:
                raise TwistMismatch(f"component {m} has twist {op.twist}, expected rho_{m} sigma")
            if not op.is_zero():
                clean[m] = op
        object.__setattr__(self, "components", clean)

    def component(self, m: int) -> TwistedHeckeOp:
        return self.components.get(m) or TwistedHeckeOp(self.level, translation(m) @ self.sigma)

    def __add__(self, other: "GradedTower") -> "GradedTower":
        if self.sigma != other.sigma or self.level != other.level:
            raise TwistMismatch("towers over different base twists")
        comps = dict(self.components)
        for m, op in other.components.items():
            comps[m] = comps[m] + op if m in comps else op
        return GradedTower(self.sigma, self.level, comps)

    def __neg__(self):
        return GradedTower(self.sigma, self.level, {m: -op for m, op in self.components.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        return GradedTower(self.sigma, self.level, {m: op * c for m, op in self.components.items()})

    __rmul__ = __mul__

    def difference_witness(self, other: "GradedTower", prec: int | None = None):
        for m in sorted(set(self.components) | set(other.components)):
            key = self.component(m).difference_witness(other.component(m), prec)
            if key is not None:
                return m, key
        return None

    def equals(self, other: "GradedTower", prec: int | None = None) -> bool:
        return self.difference_witness(other, prec) is None

    def to_json(self) -> dict:
        return {
            "sigma": [int(x) for x in self.sigma.int_entries()],
            "level": self.level,
            "components": [[m, op.to_json()] for m, op in self.components.items()],
        }

    @classmethod
    def from_json(cls, data) -> "GradedTower":
        comps = {int(m): TwistedHeckeOp.from_json(op) for m, op in data["components"]}
        return cls(Mat2Q.of(*data["sigma"]), int(data["level"]), comps)


def tower_of(sigma: Mat2Q, level: int, components: Mapping[int, TwistedHeckeOp]) -> GradedTower:
    return GradedTower(sigma, level, dict(components))


def op_Z(T: GradedTower) -> GradedTower:
    """Z(F)_alpha = m F_alpha + Y(F_alpha) on the m-th component."""
    comps = {m: op * m + lift_Y(op) for m, op in T.components.items()}
    return GradedTower(T.sigma, T.level, comps)


def op_Xn(T: GradedTower, n: int) -> GradedTower:
    """Degree-n operator X_{rho_n}: component m goes to component m + n."""
    rho = translation(n)
    return GradedTower(T.sigma, T.level, {m + n: x_tau(op, rho) for m, op in T.components.items()})


def tower_pair(T1: GradedTower, T2: GradedTower) -> GradedTower:
    """Graded pairing of towers: components (m, m') land in m + m'."""
    if T1.sigma != T2.sigma or T1.level != T2.level:
        raise TwistMismatch("towers over different base twists")
    out: dict = {}
    for m, F1 in T1.components.items():
        for n, F2 in T2.components.items():
            p = graded_pair(F1, F2, translation(m), translation(n), T1.sigma)
            out[m + n] = out[m + n] + p if m + n in out else p
    return GradedTower(T1.sigma, T1.level, out)


__all__ = [
    "pair",
    "right_act",
    "x_tau",
    "graded_pair",
    "twists_commute",
    "GradedTower",
    "tower_of",
    "op_Z",
    "op_Xn",
    "tower_pair",
]
