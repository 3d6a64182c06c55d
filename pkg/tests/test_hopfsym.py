import random
from fractions import Fraction

import pytest

from qmhecke import heckealg as hk
from qmhecke import hopfsym as hs
from qmhecke.errors import MissingInterpretation, UnknownGenerator
from qmhecke.sampling import random_op

X, Y = ("X",), ("Y",)
D1, D2, D3 = ("delta", 1), ("delta", 2), ("delta", 3)


def _uea(*pairs):
    return {tuple(w): Fraction(c) for w, c in pairs}


def test_names_round_trip():
    for g in [("D",), ("T", 2, 1), ("phi", 3), X, Y, D2, ("Z",), ("Xn", -2)]:
        assert hs.parse_generator(hs.gen_name(g)) == g
    with pytest.raises(UnknownGenerator):
        hs.parse_generator("Q7")


@pytest.mark.parametrize("lie", [hs.LIE_L, hs.LIE_L1, hs.LIE_l1, hs.LIE_lZ], ids=lambda l: l.name)
def test_presentations_are_lie_algebras(lie):
    assert hs.jacobi_failures(lie) == []
    assert hs.antisymmetry_failures(lie) == []


def test_brackets():
    assert hs.LIE_L.bracket(("T", 1, 0), ("T", 3, 0)) == {("T", 2, 0): 2}
    assert hs.LIE_L.bracket(("T", 3, 1), ("D",)) == {("T", 2, 2): Fraction(5, 12)}
    assert hs.LIE_L1.bracket(X, D2) == {D3: 1}
    assert hs.LIE_L1.bracket(Y, D3) == {D3: 3}
    assert hs.LIE_lZ.bracket(("Z",), ("Xn", 2)) == {("Xn", 2): 3}
    assert hs.LIE_lZ.bracket(("Xn", 1), ("Xn", -1)) == {}


def test_invalid_generators():
    with pytest.raises(UnknownGenerator):
        hs.LIE_L.bracket(("T", 0, 1), ("D",))


def test_pbw_normal_form():
    assert hs.pbw_normalize((Y, X), hs.LIE_L1).terms == _uea(((X,), 1), ((X, Y), 1))
    assert hs.pbw_normalize((D1, X), hs.LIE_L1).terms == _uea(((X, D1), 1), ((D2,), -1))
    assert hs.pbw_normalize((D2, D1), hs.LIE_L1).terms == _uea(((D1, D2), 1))
    # Y Y X = X Y Y + 2 X Y + X
    assert hs.pbw_normalize((Y, Y, X), hs.LIE_L1).terms == _uea(((X, Y, Y), 1), ((X, Y), 2), ((X,), 1))


def test_pbw_words():
    words = hs.pbw_words([X, Y, D1], 2)
    assert () not in words
    assert len(words) == 3 + 6
    assert all(list(w) == sorted(w, key=hs.pbw_key) for w in words)


def test_coproducts():
    h = hs.HOPF_H1
    assert h.gen_coproduct(X) == {((X,), ()): 1, ((), (X,)): 1, ((D1,), (Y,)): 1}
    assert h.gen_coproduct(D2) == {((D2,), ()): 1, ((), (D2,)): 1, ((D1,), (D1,)): 1}
    assert h.gen_coproduct(D3) == {
        ((D3,), ()): 1,
        ((), (D3,)): 1,
        ((D2,), (D1,)): 1,
        ((D1,), (D2,)): 3,
        ((D1, D1), (D1,)): 1,
    }
    assert hs.HOPF_H1_DROPPED.gen_coproduct(X) == {((X,), ()): 1, ((), (X,)): 1}


def test_antipodes():
    h = hs.HOPF_H1
    assert h.antipode_gen(X).terms == _uea(((X,), -1), ((D1, Y), 1))
    assert h.antipode_gen(D2).terms == _uea(((D2,), -1), ((D1, D1), 1))
    assert h.antipode_gen(Y).terms == _uea(((Y,), -1))
    for g in [X, Y, D1, D2, D3]:
        left, right = h.antipode_axiom(g)
        assert left.is_zero() and right.is_zero()


@pytest.mark.parametrize("hopf", [hs.HOPF_H, hs.HOPF_H1, hs.HOPF_h1, hs.HOPF_hZ], ids=lambda h: h.name)
def test_coassociativity(hopf):
    gens = list(hopf.lie.test_generators[:4])
    for w in hs.pbw_words(gens, 3):
        assert not hopf.coassociativity_defect(w)


def test_counit():
    h = hs.HOPF_H1
    assert h.counit(hs.UEAElement.one(hs.LIE_L1)) == 1
    assert h.counit(hs.UEAElement.gen(hs.LIE_L1, X)) == 0


def test_word_action_order():
    F = random_op(random.Random(0), 1, weight=2)
    interp = hs.operator_interpretation()
    assert hs.interpret_word((Y, X), interp, F).equals(hk.lift_Y(hk.lift_X(F)))
    with pytest.raises(MissingInterpretation):
        hs.interpret_word((("Z",),), interp, F)


@pytest.mark.parametrize("level", [1, 2])
def test_lie_actions(level):
    F = random_op(random.Random(level), level, weight=4)
    interp = hs.operator_interpretation()
    pairs = [(X, Y), (X, D1), (Y, D2), (D1, D2), (("D",), ("T", 2, 1)), (("T", 1, 1), ("T", 3, 0)), (("phi", 2), ("D",))]
    results = hs.verify_lie_action(hs.LIE_L1, interp, [F], pairs[:4]) + hs.verify_lie_action(hs.LIE_L, interp, [F], pairs[4:])
    assert [r.word for r in results if r.status != "pass"] == []


@pytest.mark.parametrize("level", [1, 2])
def test_h1_acts_on_star(level):
    rng = random.Random(10 + level)
    pair = (random_op(rng, level, weight=2), random_op(rng, level, weight=4))
    words = hs.pbw_words([X, Y, D1], 2)
    results = hs.verify_hopf_action(hs.HOPF_H1, hk.star, hs.operator_interpretation(), [pair], words)
    assert all(r.status == "pass" for r in results)


def test_dropped_correction_is_caught():
    rng = random.Random(3)
    pair = (random_op(rng, 1, weight=2), random_op(rng, 1, weight=4))
    results = hs.verify_hopf_action(hs.HOPF_H1_DROPPED, hk.star, hs.operator_interpretation(), [pair], [(X,)])
    assert results[0].status == "fail"
    assert results[0].witness


def test_h_acts_on_star_r():
    rng = random.Random(4)
    pair = (random_op(rng, 2, weight=2), random_op(rng, 2, weight=2))
    words = hs.pbw_words([("D",), ("T", 1, 0), ("phi", 1)], 2)
    results = hs.verify_hopf_action(hs.HOPF_H, hk.star_r, hs.operator_interpretation(), [pair], words)
    assert all(r.status == "pass" for r in results)
