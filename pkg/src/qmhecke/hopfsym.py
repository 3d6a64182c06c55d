"""Lie presentations, their enveloping algebras, coproducts and antipodes.

Generators are tuples ``(name, *params)``:
``("D",)``, ``("T", k, l)``, ``("phi", m)``, ``("X",)``, ``("Xn", n)``,
``("delta", n)``, ``("Y",)``, ``("Z",)``.  Words are tuples of generators and
act on operators with the rightmost generator applied first.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import MissingInterpretation, UnknownGenerator

Generator = tuple
Word = tuple

_RANK = {"D": 0, "T": 1, "phi": 2, "X": 3, "Xn": 4, "delta": 5, "Y": 6, "Z": 7}


def pbw_key(g: Generator):
    return (_RANK[g[0]], g[1:])


def gen_name(g: Generator) -> str:
    name = g[0]
    if name == "T":
        return f"T{g[1]}^{g[2]}"
    if name in ("phi", "delta", "Xn"):
        return f"{name}{g[1]}"
    return name


def word_name(w: Word) -> str:
    return "*".join(gen_name(g) for g in w) or "1"


def parse_generator(text: str) -> Generator:
    """Inverse of gen_name."""
    text = text.strip()
    if text in ("D", "X", "Y", "Z"):
        return (text,)
    if text.startswith("T") and "^" in text:
        k, l = text[1:].split("^")
        return ("T", int(k), int(l))
    for name in ("phi", "delta", "Xn"):
        if text.startswith(name):
            return (name, int(text[len(name):]))
    raise UnknownGenerator(text)


Combination = dict  # Generator -> Fraction


def _comb(*pairs) -> Combination:
    out: dict = {}
    for c, g in pairs:
        if c:
            out[g] = out.get(g, 0) + Fraction(c)
    return {g: c for g, c in out.items() if c}


# ------------------------------------------------------------ presentations


@dataclass(frozen=True)
class LiePresentation:
    """A Lie algebra given by generator families and a bracket rule."""

    name: str
    kinds: frozenset
    rule: Callable[[Generator, Generator], Combination]
    test_generators: tuple
    valid: Callable[[Generator], bool] = lambda g: True

    def check(self, g: Generator):
        if g[0] not in self.kinds or not self.valid(g):
            raise UnknownGenerator(f"{g!r} is not a generator of {self.name}")

    def bracket(self, g: Generator, h: Generator) -> Combination:
        self.check(g)
        self.check(h)
        if g == h:
            return {}
        return self.rule(g, h)

    def bracket_comb(self, a: Combination, b: Combination) -> Combination:
        out: dict = {}
        for g, cg in a.items():
            for h, ch in b.items():
                for k, c in self.bracket(g, h).items():
                    out[k] = out.get(k, 0) + cg * ch * c
        return {k: c for k, c in out.items() if c}


def _rule_L(g, h):
    a, b = g[0], h[0]
    if a == "phi" or b == "phi":
        return {}
    if a == "D" and b == "D":
        return {}
    if a == "T" and b == "T":
        k, l = g[1], g[2]
        k2, l2 = h[1], h[2]
        return _comb((k2 - k, ("T", k + k2 - 2, l + l2)))
    if a == "T" and b == "D":
        k, l = g[1], g[2]
        return _comb((Fraction(5, 24) * (k - 1), ("T", k - 1, l + 1)), (Fraction(-1, 2) * (k - 3), ("T", k + 1, l)))
    if a == "D" and b == "T":
        return {x: -c for x, c in _rule_L(h, g).items()}
    raise UnknownGenerator(f"no bracket for {g!r}, {h!r}")


def _valid_L(g):
    if g[0] == "T":
        return g[1] >= 1 and g[2] >= 0
    if g[0] == "phi":
        return g[1] >= 1
    return True


def _rule_L1(g, h):
    a, b = g[0], h[0]
    if a == "Y" and b == "X":
        return {("X",): Fraction(1)}
    if a == "X" and b == "delta":
        return {("delta", h[1] + 1): Fraction(1)}
    if a == "Y" and b == "delta":
        return {h: Fraction(h[1])}
    if a == "delta" and b == "delta":
        return {}
    if (b, a) in (("Y", "X"), ("X", "delta"), ("Y", "delta")):
        return {x: -c for x, c in _rule_L1(h, g).items()}
    raise UnknownGenerator(f"no bracket for {g!r}, {h!r}")


def _rule_lZ(g, h):
    a, b = g[0], h[0]
    if a == "Z" and b == "Xn":
        return {h: Fraction(h[1] + 1)}
    if a == "Xn" and b == "Z":
        return {g: Fraction(-(g[1] + 1))}
    if a == "Xn" and b == "Xn":
        return {}
    raise UnknownGenerator(f"no bracket for {g!r}, {h!r}")


LIE_L = LiePresentation(
    "L",
    frozenset({"D", "T", "phi"}),
    _rule_L,
    tuple([("D",)] + [("T", k, l) for k in range(1, 5) for l in range(0, 5)] + [("phi", m) for m in range(1, 4)]),
    _valid_L,
)
LIE_L1 = LiePresentation(
    "L1",
    frozenset({"X", "Y", "delta"}),
    _rule_L1,
    tuple([("X",), ("Y",)] + [("delta", n) for n in range(1, 5)]),
    lambda g: g[0] != "delta" or g[1] >= 1,
)
LIE_l1 = LiePresentation("l1", frozenset({"X", "Y"}), _rule_L1, (("X",), ("Y",)))
LIE_lZ = LiePresentation(
    "lZ",
    frozenset({"Z", "Xn"}),
    _rule_lZ,
    tuple([("Z",)] + [("Xn", n) for n in range(-3, 4)]),
)


def jacobi_failures(lie: LiePresentation, gens: Iterable[Generator] | None = None) -> list[tuple]:
    gens = list(lie.test_generators if gens is None else gens)
    fails = []
    for a, b, c in itertools.combinations(gens, 3):
        total: dict = {}
        for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
            inner = lie.bracket(y, z)
            for k, v in lie.bracket_comb({x: Fraction(1)}, inner).items():
                total[k] = total.get(k, 0) + v
        if any(total.values()):
            fails.append((a, b, c))
    return fails


def antisymmetry_failures(lie: LiePresentation, gens: Iterable[Generator] | None = None) -> list[tuple]:
    gens = list(lie.test_generators if gens is None else gens)
    fails = []
    for a, b in itertools.product(gens, repeat=2):
        ab, ba = lie.bracket(a, b), lie.bracket(b, a)
        if {k: -v for k, v in ba.items()} != ab:
            fails.append((a, b))
    return fails


# ------------------------------------------------------- enveloping algebra


def pbw_normalize(word: Sequence[Generator], lie: LiePresentation) -> "UEAElement":
    """Rewrite a word in normal order using g h = h g + [g, h]."""
    for g in word:
        lie.check(g)
    result: dict = {}
    stack = [(tuple(word), Fraction(1))]
    while stack:
        w, c = stack.pop()
        for i in range(len(w) - 1):
            if pbw_key(w[i]) > pbw_key(w[i + 1]):
                stack.append((w[:i] + (w[i + 1], w[i]) + w[i + 2:], c))
                for g, cg in lie.bracket(w[i], w[i + 1]).items():
                    stack.append((w[:i] + (g,) + w[i + 2:], c * cg))
                break
        else:
            result[w] = result.get(w, 0) + c
    return UEAElement(lie, result)


@dataclass(frozen=True)
class UEAElement:
    """A linear combination of normal-ordered words."""

    lie: LiePresentation
    terms: Mapping[Word, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "terms", {w: Fraction(c) for w, c in sorted(self.terms.items(), key=lambda t: _word_key(t[0])) if c})

    @classmethod
    def one(cls, lie):
        return cls(lie, {(): Fraction(1)})

    @classmethod
    def gen(cls, lie, g: Generator):
        lie.check(g)
        return cls(lie, {(g,): Fraction(1)})

    @classmethod
    def word(cls, lie, w: Sequence[Generator]):
        return pbw_normalize(w, lie)

    def __add__(self, other):
        terms = dict(self.terms)
        for w, c in other.terms.items():
            terms[w] = terms.get(w, 0) + c
        return UEAElement(self.lie, terms)

    def __neg__(self):
        return UEAElement(self.lie, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return UEAElement(self.lie, {w: c * other for w, c in self.terms.items()})
        out = UEAElement(self.lie)
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                out = out + pbw_normalize(w1 + w2, self.lie) * (c1 * c2)
        return out

    __rmul__ = lambda self, c: self * c

    def bracket(self, other):
        return self * other - other * self

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, UEAElement) and self.terms == other.terms

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*{word_name(w)}" if c != 1 else word_name(w) for w, c in self.terms.items())


def _word_key(w: Word):
    return (len(w), [pbw_key(g) for g in w])


def comb_to_uea(lie, comb: Combination) -> UEAElement:
    return UEAElement(lie, {(g,): c for g, c in comb.items()})


def pbw_words(gens: Sequence[Generator], max_degree: int) -> list[Word]:
    """All normal-ordered words in the given generators up to the degree bound."""
    ordered = sorted(gens, key=pbw_key)
    out = []
    for d in range(1, max_degree + 1):
        out.extend(itertools.combinations_with_replacement(ordered, d))
    return out


# ----------------------------------------------------------------- tensors

Tensor = dict  # (Word, Word) -> Fraction


def _tensor_clean(t: Tensor) -> Tensor:
    return {k: v for k, v in sorted(t.items(), key=lambda kv: (_word_key(kv[0][0]), _word_key(kv[0][1]))) if v}


def tensor_mul(lie, a: Tensor, b: Tensor) -> Tensor:
    out: dict = {}
    for (l1, r1), c1 in a.items():
        for (l2, r2), c2 in b.items():
            left = pbw_normalize(l1 + l2, lie)
            right = pbw_normalize(r1 + r2, lie)
            for wl, cl in left.terms.items():
                for wr, cr in right.terms.items():
                    key = (wl, wr)
                    out[key] = out.get(key, 0) + c1 * c2 * cl * cr
    return _tensor_clean(out)


def tensor_add(a: Tensor, b: Tensor, scale=1) -> Tensor:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v * scale
    return _tensor_clean(out)


def primitive(g: Generator) -> Tensor:
    return {((g,), ()): Fraction(1), ((), (g,)): Fraction(1)}


@dataclass(frozen=True)
class HopfAlgebra:
    """Enveloping algebra of a presentation with a coproduct on generators."""

    name: str
    lie: LiePresentation
    corrections: Callable[["HopfAlgebra", Generator], Tensor] | None = None

    def gen_coproduct(self, g: Generator) -> Tensor:
        self.lie.check(g)
        base = primitive(g)
        if self.corrections is None:
            return base
        return tensor_add(base, self.corrections(self, g))

    def coproduct_word(self, w: Sequence[Generator]) -> Tensor:
        out: Tensor = {((), ()): Fraction(1)}
        for g in w:
            out = tensor_mul(self.lie, out, self.gen_coproduct(g))
        return out

    def coproduct(self, e: UEAElement) -> Tensor:
        out: Tensor = {}
        for w, c in e.terms.items():
            out = tensor_add(out, self.coproduct_word(w), c)
        return out

    def antipode_gen(self, g: Generator) -> UEAElement:
        """S(g) = -g - sum S(a) b over the non-primitive terms a (x) b of Delta(g)."""
        out = -UEAElement.gen(self.lie, g)
        for (a, b), c in self.gen_coproduct(g).items():
            if (a, b) in (((g,), ()), ((), (g,))):
                continue
            out = out - self.antipode_word(a) * UEAElement(self.lie, {b: Fraction(1)}) * c
        return out

    def antipode_word(self, w: Sequence[Generator]) -> UEAElement:
        out = UEAElement.one(self.lie)
        for g in w:
            out = self.antipode_gen(g) * out
        return out

    def antipode(self, e: UEAElement) -> UEAElement:
        out = UEAElement(self.lie)
        for w, c in e.terms.items():
            out = out + self.antipode_word(w) * c
        return out

    def counit(self, e: UEAElement) -> Fraction:
        return e.terms.get((), Fraction(0))

    def antipode_axiom(self, g: Generator) -> tuple[UEAElement, UEAElement]:
        """(m(S (x) id) Delta(g), m(id (x) S) Delta(g)); both should be zero."""
        left = UEAElement(self.lie)
        right = UEAElement(self.lie)
        for (a, b), c in self.gen_coproduct(g).items():
            wa = UEAElement(self.lie, {a: Fraction(1)})
            wb = UEAElement(self.lie, {b: Fraction(1)})
            left = left + self.antipode_word(a) * wb * c
            right = right + wa * self.antipode_word(b) * c
        return left, right

    def coassociativity_defect(self, w: Sequence[Generator]) -> dict:
        """(Delta (x) id) Delta(w) - (id (x) Delta) Delta(w) as a map on word triples."""
        out: dict = {}
        for (a, b), c in self.coproduct_word(w).items():
            for (a1, a2), c1 in self.coproduct_word(a).items():
                out[(a1, a2, b)] = out.get((a1, a2, b), 0) + c * c1
            for (b1, b2), c2 in self.coproduct_word(b).items():
                out[(a, b1, b2)] = out.get((a, b1, b2), 0) - c * c2
        return {k: v for k, v in out.items() if v}


def _h1_corrections(drop_correction: bool):
    def rule(hopf: HopfAlgebra, g: Generator) -> Tensor:
        if g == ("X",):
            if drop_correction:
                return {}
            return {((("delta", 1),), (("Y",),)): Fraction(1)}
        if g[0] == "delta" and g[1] > 1:
            # Delta(delta_{n+1}) = [Delta X, Delta delta_n]
            dx = hopf.gen_coproduct(("X",))
            dd = hopf.gen_coproduct(("delta", g[1] - 1))
            comm = tensor_add(tensor_mul(hopf.lie, dx, dd), tensor_mul(hopf.lie, dd, dx), -1)
            return tensor_add(comm, primitive(g), -1)
        return {}

    return rule


HOPF_H = HopfAlgebra("H", LIE_L)
HOPF_H1 = HopfAlgebra("H1", LIE_L1, _h1_corrections(False))
HOPF_H1_DROPPED = HopfAlgebra("H1-dropped", LIE_L1, _h1_corrections(True))
HOPF_h1 = HopfAlgebra("h1", LIE_l1)
HOPF_hZ = HopfAlgebra("hZ", LIE_lZ)


# ----------------------------------------------------------- interpretation

Interpretation = Mapping[str, Callable]


def _apply_gen(interp: Interpretation, g: Generator, obj):
    fn = interp.get(g[0])
    if fn is None:
        raise MissingInterpretation(f"no interpretation for {gen_name(g)}")
    return fn(obj, *g[1:])


def interpret_word(w: Sequence[Generator], interp: Interpretation, obj):
    for g in reversed(w):
        obj = _apply_gen(interp, g, obj)
    return obj


def interpret(e: UEAElement, interp: Interpretation, obj):
    """Linear extension of the word action; the rightmost generator acts first."""
    out = None
    for w, c in e.terms.items():
        term = interpret_word(w, interp, obj) * c
        out = term if out is None else out + term
    return obj * 0 if out is None else out


def operator_interpretation() -> dict:
    """Generators acting on (twisted) Hecke operators through the lifted operators."""
    from . import heckealg as h

    return {
        "D": lambda F: h.lift_D(F),
        "T": lambda F, k, l: h.lift_T(k, l, F),
        "phi": lambda F, m: h.lift_phi(m, F),
        "X": lambda F: h.lift_X(F),
        "Y": lambda F: h.lift_Y(F),
        "delta": lambda F, n: h.lift_delta(n, F),
    }


def tower_interpretation() -> dict:
    from . import twisted as tw

    return {
        "Z": lambda T: tw.op_Z(T),
        "Xn": lambda T, n: tw.op_Xn(T, n),
    }


# ---------------------------------------------------------------- verifier


@dataclass
class CheckResult:
    suite: str
    identity: str
    word: str
    sample: int
    status: str
    witness: str | None = None

    def to_json(self) -> dict:
        out = {"suite": self.suite, "identity": self.identity, "word": self.word, "sample": self.sample, "status": self.status}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _witness(diff) -> str | None:
    if diff is None:
        return None
    if isinstance(diff, tuple) and len(diff) == 2 and isinstance(diff[0], int):
        m, key = diff
        return f"component {m}: {key.to_json()}"
    return str(diff.to_json())


def verify_hopf_action(
    hopf: HopfAlgebra,
    product: Callable,
    interp: Interpretation,
    samples: Sequence[tuple],
    words: Sequence[Word],
    suite: str = "",
    identity: str = "hopf-action",
) -> list[CheckResult]:
    """Check h(F1 . F2) = sum h1(F1) . h2(F2) for every word and sample pair."""
    results = []
    for w in words:
        cop = hopf.coproduct_word(w)
        for idx, (F1, F2) in enumerate(samples):
            lhs = interpret_word(w, interp, product(F1, F2))
            rhs = None
            for (a, b), c in cop.items():
                term = product(interpret_word(a, interp, F1), interpret_word(b, interp, F2)) * c
                rhs = term if rhs is None else rhs + term
            diff = lhs.difference_witness(rhs)
            status = "pass" if diff is None else "fail"
            results.append(CheckResult(suite, identity, word_name(w), idx, status, _witness(diff)))
    return results


def verify_lie_action(
    lie: LiePresentation,
    interp: Interpretation,
    samples: Sequence,
    pairs: Sequence[tuple[Generator, Generator]],
    suite: str = "",
) -> list[CheckResult]:
    """Check g(h(F)) - h(g(F)) = [g, h](F) for each generator pair and sample."""
    results = []
    for g, h in pairs:
        bracket = comb_to_uea(lie, lie.bracket(g, h))
        for idx, F in enumerate(samples):
            lhs = interpret_word((g, h), interp, F) - interpret_word((h, g), interp, F)
            rhs = interpret(bracket, interp, F)
            diff = lhs.difference_witness(rhs)
            results.append(
                CheckResult(suite, "commutator", f"[{gen_name(g)},{gen_name(h)}]", idx, "pass" if diff is None else "fail", _witness(diff))
            )
    return results


__all__ = [
    "LiePresentation",
    "UEAElement",
    "HopfAlgebra",
    "LIE_L",
    "LIE_L1",
    "LIE_l1",
    "LIE_lZ",
    "HOPF_H",
    "HOPF_H1",
    "HOPF_H1_DROPPED",
    "HOPF_h1",
    "HOPF_hZ",
    "pbw_normalize",
    "pbw_words",
    "pbw_key",
    "gen_name",
    "word_name",
    "parse_generator",
    "jacobi_failures",
    "antisymmetry_failures",
    "interpret",
    "interpret_word",
    "operator_interpretation",
    "tower_interpretation",
    "verify_hopf_action",
    "verify_lie_action",
    "CheckResult",
    "comb_to_uea",
]
