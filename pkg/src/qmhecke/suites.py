"""Named identity suites, each run per sample with its own deterministic seed."""

from __future__ import annotations

import itertools
import random
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable

from . import heckealg as hk
from . import hopfsym as hs
from . import twisted as tw
from .errors import NotDecomposable
from .exactq import PuiseuxSeries, qs_theta
from .forms import FormExpr, delta, eisenstein, g2_series, mu_expr, nu_expr, working_precision
from .lattice import DEFAULT_ORBIT_GUARD, Mat2Q, sl2_order, translation
from .quasimod import (
    G2,
    QuasiModularForm,
    decompose,
    op_D,
    op_T,
    op_W,
    op_X,
    op_Y,
    qm_dslash,
    qm_scale_by_form,
)
from .sampling import random_generated_op, random_matrix, random_op, random_qm, random_tower

SUITES = (
    "qm-structure",
    "star-assoc",
    "embedding",
    "lie-L",
    "hopf-H",
    "hopf-H1",
    "twisted-pairing",
    "right-module",
    "graded-hZ",
)
NEGATIVE_CONTROLS = ("drop-delta-term",)
TWISTS = {
    "identity": Mat2Q.identity(),
    "translation": Mat2Q.of(1, 1, 0, 1),
    "inversion": Mat2Q.of(0, -1, 1, 0),
}


@dataclass(frozen=True)
class SuiteConfig:
    suite: str
    level: int = 1
    prec: int = 12
    samples: int = 5
    seed: int = 0
    guard_orbit: int = DEFAULT_ORBIT_GUARD
    negative_control: str | None = None

    def validate(self):
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        if self.prec < 8:
            raise ValueError("precision must be at least 8")
        if self.level not in (1, 2, 3):
            raise ValueError("suites run at level 1, 2 or 3")
        if self.samples < 1:
            raise ValueError("need at least one sample")
        if self.negative_control is not None:
            if self.negative_control not in NEGATIVE_CONTROLS:
                raise ValueError(f"unknown negative control {self.negative_control!r}")
            if self.suite != "hopf-H1":
                raise ValueError("the drop-delta-term control applies to hopf-H1")

    def to_json(self) -> dict:
        return asdict(self)

    def sample_rng(self, idx: int) -> random.Random:
        return random.Random(f"{self.seed}:{self.suite}:{self.level}:{idx}")


Result = hs.CheckResult


def _check(cfg: SuiteConfig, identity: str, idx: int, ok: bool, word: str = "", witness: str | None = None) -> Result:
    return Result(cfg.suite, identity, word, idx, "pass" if ok else "fail", None if ok else (witness or "mismatch"))


def _op_check(cfg, identity, idx, lhs, rhs, word="") -> Result:
    diff = lhs.difference_witness(rhs)
    return Result(cfg.suite, identity, word, idx, "pass" if diff is None else "fail", hs._witness(diff))


# ------------------------------------------------------------- qm-structure


def _qm_structure(cfg: SuiteConfig, idx: int) -> list[Result]:
    rng = cfg.sample_rng(idx)
    out = []
    if idx == 0:
        lhs = qs_theta(g2_series(41))
        g4 = QuasiModularForm.modular(eisenstein(4))
        rhs = (g4 * Fraction(5, 6) - G2 * G2 * 2).expansion(41)
        out.append(_check(cfg, "g2-derivative", idx, lhs.agrees_with(rhs, 41)))
        bad = eisenstein(4).expansion(cfg.prec) + PuiseuxSeries.monomial(3, 1, cfg.prec)
        try:
            decompose(bad, 4, 0)
            rejected = False
        except NotDecomposable:
            rejected = True
        out.append(_check(cfg, "reject-non-quasimodular", idx, rejected))
    weight = rng.choice([4, 6, 8, 10, 12])
    f = random_qm(rng, weight, 1, 3)
    prec = max(cfg.prec, 24)
    out.append(_check(cfg, "decompose-roundtrip", idx, decompose(f.expansion(prec), weight, 3).equals(f), f"weight {weight}"))
    level = cfg.level
    g = random_qm(rng, rng.choice([2, 4, 6]), level, 2)
    h = random_qm(rng, rng.choice([4, 6]), level, 2)
    alpha = random_matrix(rng, level, (1, 2, 3, 6))
    beta = random_matrix(rng, level, (1, 2, 3))
    out.append(_check(cfg, "dslash-action", idx, qm_dslash(g, alpha @ beta).equals(qm_dslash(qm_dslash(g, alpha), beta))))
    out.append(_check(cfg, "dslash-multiplicative", idx, qm_dslash(g * h, alpha).equals(qm_dslash(g, alpha) * qm_dslash(h, alpha))))
    upper = Mat2Q.of(rng.randint(1, 3), rng.randint(-2, 2), 0, rng.randint(1, 3))
    out.append(_check(cfg, "dslash-matches-substitution", idx, _dslash_expansion_check(g, upper, cfg.prec)))
    for name, op in (("D", op_D), ("W2", lambda x: op_W(2, x)), ("X", op_X), ("Y", op_Y)):
        out.append(_check(cfg, "derivation", idx, op(g * h).equals(op(g) * h + g * op(h)), name))
    nu1 = nu_expr(alpha, 1)
    out.append(_check(cfg, "D-slash-lemma", idx, qm_dslash(op_D(g), alpha).equals(op_D(qm_dslash(g, alpha)) + qm_scale_by_form(qm_dslash(op_W(1, g), alpha), nu1))))
    out.append(_check(cfg, "W-slash-lemma", idx, qm_dslash(op_W(3, g), alpha).equals(op_W(3, qm_dslash(g, alpha)))))
    k, l = rng.randint(1, 4), rng.randint(1, 2)
    t_rhs = op_T(k, l, qm_dslash(g, alpha)) - qm_scale_by_form(qm_dslash(op_T(k, 0, g), alpha), nu_expr(alpha, l)) * Fraction(24, 5)
    out.append(_check(cfg, "T-slash-lemma", idx, qm_dslash(op_T(k, l, g), alpha).equals(t_rhs), f"T{k}^{l}"))
    x_rhs = op_X(qm_dslash(g, alpha)) + qm_dslash(qm_scale_by_form(op_Y(g), mu_expr(alpha.inverse())), alpha)
    out.append(_check(cfg, "X-slash-lemma", idx, qm_dslash(op_X(g), alpha).equals(x_rhs)))
    out.append(_check(cfg, "Y-slash-lemma", idx, op_Y(qm_dslash(g, alpha)).equals(qm_dslash(op_Y(g), alpha))))
    out.append(_check(cfg, "YX-commutator", idx, (op_Y(op_X(g)) - op_X(op_Y(g))).equals(op_X(g))))
    kw = rng.randint(1, 4)
    wd = op_W(kw, op_D(g)) - op_D(op_W(kw, g))
    wd_rhs = QuasiModularForm.zero(wd.weight, g.level)
    if kw > 1:
        wd_rhs = op_T(kw - 1, 1, g) * (Fraction(5, 24) * (kw - 1))
    wd_rhs = wd_rhs - op_W(kw + 1, g) * Fraction(kw - 3, 2)
    out.append(_check(cfg, "WD-commutator", idx, wd.equals(wd_rhs), f"W{kw}"))
    return out


def _dslash_expansion_check(f: QuasiModularForm, alpha: Mat2Q, prec: int) -> bool:
    """Compare symbolic slashing with direct substitution for upper-triangular alpha."""
    from .forms import slash_series

    g2 = g2_series(prec + 1)
    lhs = qm_dslash(f, alpha).expansion(prec)
    rhs = PuiseuxSeries.zero(prec)
    for i, c in enumerate(f.coeffs):
        if c.is_zero():
            continue
        base = c.expansion(Fraction(prec) * alpha.d / alpha.a + 1)
        term = slash_series(base, f.weight - 2 * i, alpha).truncate(prec)
        rhs = rhs + term * (g2**i).truncate(prec)
    return lhs.agrees_with(rhs, prec)


# --------------------------------------------------------------- star-assoc


def _star_assoc(cfg: SuiteConfig, idx: int) -> list[Result]:
    rng = cfg.sample_rng(idx)
    level = cfg.level
    F, G, H = (random_generated_op(rng, level) for _ in range(3))
    out = [
        _op_check(cfg, "star-associativity", idx, hk.star(hk.star(F, G), H), hk.star(F, hk.star(G, H))),
    ]
    e = hk.identity_op(level)
    out.append(_op_check(cfg, "star-left-unit", idx, hk.star(e, F), F))
    out.append(_op_check(cfg, "star-right-unit", idx, hk.star(F, e), F))
    A, B, C = (random_op(rng, level, weight=w, bases=1, dets=(1, 2)) for w in (0, 2, 4))
    out.append(_op_check(cfg, "star-r-associativity", idx, hk.star_r(hk.star_r(A, B), C), hk.star_r(A, hk.star_r(B, C))))
    cov = hk.check_covariance(hk.star(F, G), samples=6, seed=idx)
    out.append(_check(cfg, "star-covariance", idx, cov is None, witness=str(cov)))
    return out


# ---------------------------------------------------------------- embedding


def _embedding(cfg: SuiteConfig, idx: int) -> list[Result]:
    level = cfg.level
    out = []
    if idx == 0:
        t2, t3, t6 = (hk.tn_op(n, level, cfg.guard_orbit) for n in (2, 3, 6))
        prod = hk.star(t2, t3)
        # T_n at level N sums over every Gamma(N)-class, so products pick up the index of Gamma(N)
        index = sl2_order(level) if level > 1 else 1
        out.append(_op_check(cfg, "T2*T3=index*T6", idx, prod, t6 * index))
        out.append(_check(cfg, "depth-zero-closure", idx, all(v.depth == 0 for _, v in prod.items())))
        if level == 1:
            d = QuasiModularForm.modular(delta())
            taus = {}
            for n, op in ((2, t2), (3, t3), (6, t6)):
                image = hk.act_on_form(op, d)
                lam = (image.expansion(3).coefficient(1) / d.expansion(3).coefficient(1)).to_fraction()
                out.append(_check(cfg, "delta-eigenform", idx, image.equals(d * lam), f"T{n}"))
                taus[n] = lam * n**5
            ok = taus == {2: -24, 3: 252, 6: -6048} and taus[2] * taus[3] == taus[6]
            out.append(_check(cfg, "tau-multiplicativity", idx, ok, witness=str(taus)))
    rng = cfg.sample_rng(idx)
    F = random_generated_op(rng, level)
    G = random_generated_op(rng, level)
    f = random_qm(rng, rng.choice([4, 6]), level, 2)
    lhs = hk.act_on_form(hk.star(F, G), f)
    rhs = hk.act_on_form(F, hk.act_on_form(G, f))
    out.append(_check(cfg, "module-law", idx, lhs.equals(rhs)))
    out.append(_check(cfg, "unit-action", idx, hk.act_on_form(hk.identity_op(level), f).equals(f)))
    return out


# -------------------------------------------------------------------- lie-L


def _lie_L(cfg: SuiteConfig, idx: int) -> list[Result]:
    rng = cfg.sample_rng(idx)
    out = []
    if idx == 0:
        for lie in (hs.LIE_L, hs.LIE_L1, hs.LIE_l1, hs.LIE_lZ):
            out.append(_check(cfg, "jacobi", idx, not hs.jacobi_failures(lie), lie.name))
            out.append(_check(cfg, "antisymmetry", idx, not hs.antisymmetry_failures(lie), lie.name))
        for lie in (hs.LIE_L, hs.LIE_L1):
            ok = True
            for g, h in itertools.combinations(lie.test_generators[:8], 2):
                lhs = hs.pbw_normalize((g, h), lie) - hs.pbw_normalize((h, g), lie)
                if lhs != hs.comb_to_uea(lie, lie.bracket(g, h)):
                    ok = False
            out.append(_check(cfg, "pbw-respects-bracket", idx, ok, lie.name))
    F = random_op(rng, cfg.level, weight=rng.choice([4, 6]), bases=2)
    interp = hs.operator_interpretation()
    gens = [("D",)] + [("T", k, l) for k in range(1, 5) for l in range(3)] + [("phi", m) for m in range(1, 4)]
    out.extend(hs.verify_lie_action(hs.LIE_L, interp, [F], list(itertools.combinations(gens, 2)), cfg.suite))
    l1 = [("X",), ("Y",), ("delta", 1), ("delta", 2)]
    out.extend(hs.verify_lie_action(hs.LIE_L1, interp, [F], list(itertools.combinations(l1, 2)), cfg.suite))
    for r in out:
        r.sample = idx
    E = hk.lift_E
    for g in [("D",), ("T", rng.randint(1, 4), rng.randint(0, 2)), ("phi", rng.randint(1, 3))]:
        lhs = E(hs.interpret_word((g,), interp, F)) - hs.interpret_word((g,), interp, E(F))
        out.append(_op_check(cfg, "commutator", idx, lhs, F * 0, f"[E,{hs.gen_name(g)}]"))
    return out


# ------------------------------------------------------------------- hopf-H


H_GENERATORS = [("D",), ("T", 1, 0), ("T", 2, 1), ("phi", 1)]


def _hopf_H(cfg: SuiteConfig, idx: int) -> list[Result]:
    rng = cfg.sample_rng(idx)
    level = cfg.level
    F1 = random_op(rng, level, weight=rng.choice([2, 4]), bases=2, unimodular_base=True)
    F2 = random_op(rng, level, weight=rng.choice([2, 4]), bases=2)
    interp = hs.operator_interpretation()
    words = hs.pbw_words(H_GENERATORS, 2)
    out = hs.verify_hopf_action(hs.HOPF_H, hk.star_r, interp, [(F1, F2)], words, cfg.suite, "hopf-action-star-r")
    for r in out:
        r.sample = idx
    out.append(_check(cfg, "star-r-nonzero", idx, not hk.star_r(F1, F2).is_zero()))
    star = hk.star
    dF1, dF2 = hk.lift_D(F1), hk.lift_D(F2)
    lhs = hk.lift_D(star(F1, F2))
    rhs = star(dF1, F2) + star(F1, dF2) - star(hk.lift_phi(1, F1), hk.lift_T(1, 0, F2))
    out.append(_op_check(cfg, "D-on-star", idx, lhs, rhs, "D"))
    k, l = rng.randint(1, 4), rng.randint(0, 2)
    lhs = hk.lift_T(k, l, star(F1, F2))
    rhs = star(hk.lift_T(k, l, F1), F2) + star(F1, hk.lift_T(k, l, F2))
    if l:
        rhs = rhs + star(hk.lift_phi(l, F1), hk.lift_T(k, 0, F2)) * Fraction(24, 5)
    out.append(_op_check(cfg, "T-on-star", idx, lhs, rhs, f"T{k}^{l}"))
    m = rng.randint(1, 3)
    lhs = hk.lift_phi(m, star(F1, F2))
    rhs = star(hk.lift_phi(m, F1), F2) + star(F1, hk.lift_phi(m, F2))
    out.append(_op_check(cfg, "phi-on-star", idx, lhs, rhs, f"phi{m}"))
    return out


# ------------------------------------------------------------------ hopf-H1


H1_GENERATORS = [("X",), ("Y",), ("delta", 1)]


def _hopf_H1(cfg: SuiteConfig, idx: int) -> list[Result]:
    rng = cfg.sample_rng(idx)
    level = cfg.level
    hopf = hs.HOPF_H1_DROPPED if cfg.negative_control == "drop-delta-term" else hs.HOPF_H1
    out = []
    if idx == 0:
        for g in [("X",), ("Y",), ("delta", 1), ("delta", 2)]:
            left, right = hopf.antipode_axiom(g)
            out.append(_check(cfg, "antipode-axiom", idx, left.is_zero() and right.is_zero(), hs.gen_name(g)))
        for w in hs.pbw_words(H1_GENERATORS, 2):
            out.append(_check(cfg, "coassociativity", idx, not hopf.coassociativity_defect(w), hs.word_name(w)))
    F1 = random_op(rng, level, weight=rng.choice([0, 2, 4]), bases=2)
    F2 = random_op(rng, level, weight=rng.choice([4, 6]), bases=2)
    interp = hs.operator_interpretation()
    res = hs.verify_hopf_action(hopf, hk.star, interp, [(F1, F2)], hs.pbw_words(H1_GENERATORS, 2), cfg.suite, "hopf-action-star")
    for r in res:
        r.sample = idx
    out.extend(res)
    return out


# ---------------------------------------------------------- twisted-pairing


def _twisted_pairing(cfg: SuiteConfig, idx: int) -> list[Result]:
    rng = cfg.sample_rng(idx)
    level = cfg.level
    out = []
    interp = hs.operator_interpretation()
    for name, sigma in TWISTS.items():
        F1 = random_op(rng, level, sigma, weight=rng.choice([0, 2]), bases=2, unimodular_base=True)
        F2 = random_op(rng, level, sigma, weight=rng.choice([4, 6]), bases=2)
        P = tw.pair(F1, F2)
        out.append(_check(cfg, "pair-nonzero", idx, not P.is_zero(), name))
        cov = hk.check_covariance(P, samples=8, seed=idx)
        out.append(_check(cfg, "pair-covariance", idx, cov is None, name, str(cov)))
        res = hs.verify_hopf_action(hs.HOPF_h1, tw.pair, interp, [(F1, F2)], hs.pbw_words([("X",), ("Y",)], 2), cfg.suite, f"h1-on-pair[{name}]")
        for r in res:
            r.sample = idx
        out.extend(res)
        gp = tw.graded_pair(F1, F2, Mat2Q.identity(), Mat2Q.identity(), sigma)
        out.append(_op_check(cfg, "graded-pair-specialization", idx, gp, P, name))
        tau = translation(rng.choice([-1, 1, 2]))
        tau2 = translation(rng.choice([-1, 1]))
        G1 = random_op(rng, level, tau @ sigma, weight=2, bases=2, dets=(1, 2), unimodular_base=True)
        G2_ = random_op(rng, level, tau2 @ sigma, weight=4, bases=1, dets=(1, 2))
        gp = tw.graded_pair(G1, G2_, tau, tau2, sigma)
        cov = hk.check_covariance(gp, samples=8, seed=idx)
        out.append(_check(cfg, "graded-pair-covariance", idx, cov is None, name, str(cov)))
        tau3 = translation(1)
        lhs = tw.x_tau(gp, tau3)
        rhs = tw.graded_pair(tw.x_tau(G1, tau3), G2_, tau3 @ tau, tau2, sigma) + tw.graded_pair(G1, tw.x_tau(G2_, tau3), tau, tau3 @ tau2, sigma)
        out.append(_op_check(cfg, "x-tau-leibniz", idx, lhs, rhs, name))
        t1, t2 = translation(1), translation(-2)
        comm = tw.x_tau(tw.x_tau(F1, t1), t2) - tw.x_tau(tw.x_tau(F1, t2), t1)
        out.append(_op_check(cfg, "x-tau-commute", idx, comm, _zero_like(comm), name))
    return out


def _zero_like(like: hk.TwistedHeckeOp) -> hk.TwistedHeckeOp:
    return hk.TwistedHeckeOp(like.level, like.twist)


# ------------------------------------------------------------- right-module


def _right_module(cfg: SuiteConfig, idx: int) -> list[Result]:
    rng = cfg.sample_rng(idx)
    level = cfg.level
    out = []
    interp = hs.operator_interpretation()
    for name, sigma in TWISTS.items():
        F1 = random_op(rng, level, sigma, weight=rng.choice([0, 2]), bases=2)
        F2 = random_op(rng, level, weight=rng.choice([4, 6]), bases=2)
        F3 = random_op(rng, level, weight=rng.choice([0, 2]), bases=1, dets=(1, 2))
        R = tw.right_act(F1, F2)
        cov = hk.check_covariance(R, samples=8, seed=idx)
        out.append(_check(cfg, "right-act-covariance", idx, cov is None, name, str(cov)))
        out.append(_op_check(cfg, "right-module-associativity", idx, tw.right_act(R, F3), tw.right_act(F1, hk.star(F2, F3)), name))
        out.append(_op_check(cfg, "right-module-unit", idx, tw.right_act(F1, hk.identity_op(level)), F1, name))
        res = hs.verify_hopf_action(hs.HOPF_H1, tw.right_act, interp, [(F1, F2)], hs.pbw_words(H1_GENERATORS, 2), cfg.suite, f"H1-on-right-act[{name}]")
        for r in res:
            r.sample = idx
        out.extend(res)
    return out


# ---------------------------------------------------------------- graded-hZ


def _graded_hZ(cfg: SuiteConfig, idx: int) -> list[Result]:
    rng = cfg.sample_rng(idx)
    level = cfg.level
    out = []
    sigma = list(TWISTS.values())[idx % len(TWISTS)]
    A = random_tower(rng, sigma, level, (0, 1))
    B = random_tower(rng, sigma, level, (-1, 0))
    out.append(_check(cfg, "tower-pair-nonzero", idx, bool(tw.tower_pair(A, B).components)))
    for n in range(-2, 3):
        lhs = tw.op_Z(tw.op_Xn(A, n)) - tw.op_Xn(tw.op_Z(A), n)
        out.append(_op_check(cfg, "Z-Xn-commutator", idx, lhs, tw.op_Xn(A, n) * (n + 1), f"n={n}"))
        for n2 in range(n + 1, 3):
            lhs = tw.op_Xn(tw.op_Xn(A, n2), n)
            rhs = tw.op_Xn(tw.op_Xn(A, n), n2)
            out.append(_op_check(cfg, "Xn-Xn-commutator", idx, lhs, rhs, f"n={n},{n2}"))
    gens = [("Z",), ("Xn", 0), ("Xn", 1), ("Xn", -1)]
    res = hs.verify_hopf_action(hs.HOPF_hZ, tw.tower_pair, hs.tower_interpretation(), [(A, B)], hs.pbw_words(gens, 2), cfg.suite, "hZ-on-tower-pair")
    for r in res:
        r.sample = idx
    out.extend(res)
    if idx == 0:
        m1 = tw.pair(A.component(0), B.component(0))
        m2 = tw.tower_pair(
            tw.GradedTower(sigma, level, {0: A.component(0)}),
            tw.GradedTower(sigma, level, {0: B.component(0)}),
        ).component(0)
        out.append(_op_check(cfg, "graded-pair-specialization", idx, m2, m1))
        zx = hs.pbw_normalize((("Z",), ("Xn", 0)), hs.LIE_lZ) - hs.pbw_normalize((("Xn", 0), ("Z",)), hs.LIE_lZ)
        yx = hs.pbw_normalize((("Y",), ("X",)), hs.LIE_L1) - hs.pbw_normalize((("X",), ("Y",)), hs.LIE_L1)
        out.append(_check(cfg, "l1-embeds-in-lZ", idx, zx.terms == {(("Xn", 0),): 1} and yx.terms == {(("X",),): 1}))
    return out


RUNNERS: dict[str, Callable[[SuiteConfig, int], list[Result]]] = {
    "qm-structure": _qm_structure,
    "star-assoc": _star_assoc,
    "embedding": _embedding,
    "lie-L": _lie_L,
    "hopf-H": _hopf_H,
    "hopf-H1": _hopf_H1,
    "twisted-pairing": _twisted_pairing,
    "right-module": _right_module,
    "graded-hZ": _graded_hZ,
}


def run_sample(cfg: SuiteConfig, idx: int) -> list[dict]:
    with working_precision(cfg.prec):
        return [r.to_json() for r in RUNNERS[cfg.suite](cfg, idx)]


def run_suite(cfg: SuiteConfig, workers: int = 1) -> list[dict]:
    cfg.validate()
    indices = range(cfg.samples)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run_sample, [cfg] * cfg.samples, indices))
    else:
        chunks = [run_sample(cfg, i) for i in indices]
    results = [r for chunk in chunks for r in chunk]
    return sorted(results, key=lambda r: (r["sample"], r["identity"], r["word"], r["status"]))


def build_report(cfg: SuiteConfig, results: list[dict]) -> dict:
    failed = sum(r["status"] == "fail" for r in results)
    return {
        "format_version": 1,
        "config": cfg.to_json(),
        "summary": {"checked": len(results), "passed": len(results) - failed, "failed": failed},
        "status": "pass" if failed == 0 else "fail",
        "results": results,
    }


__all__ = ["SUITES", "SuiteConfig", "run_suite", "run_sample", "build_report", "RUNNERS", "TWISTS"]
