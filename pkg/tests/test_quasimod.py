import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmhecke.errors import NotDecomposable
from qmhecke.exactq import PuiseuxSeries, qs_theta
from qmhecke.forms import delta, eisenstein, eisenstein_series, g2_series, nu_expr, working_precision
from qmhecke.lattice import Mat2Q
from qmhecke.quasimod import (
    G2,
    D_G2SQ_COEFF,
    D_G4_COEFF,
    QuasiModularForm,
    decompose,
    g2_power,
    level_one_qm_basis,
    op_D,
    op_E,
    op_T,
    op_W,
    op_X,
    op_Y,
    qm_dslash,
    qm_scale_by_form,
)
from qmhecke.sampling import random_qm

G4 = QuasiModularForm.modular(eisenstein(4))
G6 = QuasiModularForm.modular(eisenstein(6))
DELTA = QuasiModularForm.modular(delta())


def _theta(f: QuasiModularForm) -> QuasiModularForm:
    """theta f rewritten through the operators on G2-polynomials."""
    return op_X(f) - G2 * f * (2 * f.weight) + op_W(3, f) * 2 + op_T(1, 1, f) * Fraction(5, 6)


def test_d_constants():
    assert (D_G4_COEFF, D_G2SQ_COEFF) == (Fraction(-5, 24), Fraction(1, 2))
    assert op_D(G2).equals(G4 * Fraction(-5, 24) + G2 * G2 * Fraction(1, 2))


def test_g2_derivative_decomposes():
    s = qs_theta(g2_series(30))
    assert decompose(s, 4, 2).equals(G4 * Fraction(5, 6) - G2 * G2 * 2)


@given(st.integers(0, 10_000), st.sampled_from([2, 4, 6, 8, 10, 12]))
@settings(max_examples=25, deadline=None)
def test_decompose_round_trip(seed, weight):
    f = random_qm(random.Random(seed), weight, 1, 3)
    assert decompose(f.expansion(24), weight, 3).equals(f)


@given(st.integers(0, 10_000), st.sampled_from([4, 6, 8]))
@settings(max_examples=15, deadline=None)
def test_theta_through_operators(seed, weight):
    f = random_qm(random.Random(seed), weight, 1, 2)
    assert qs_theta(f.expansion(16)) == _theta(f).expansion(16)


def test_decompose_rejects_perturbed_series():
    bad = eisenstein_series(4, 12) + PuiseuxSeries.monomial(3, 1, 12)
    with pytest.raises(NotDecomposable):
        decompose(bad, 4, 0)
    with pytest.raises(NotDecomposable):
        decompose(bad, 4, 2)


def test_basis_sizes():
    # dim of quasimodular forms of weight 12 and depth <= 6: sum of dim M_{12-2i}
    assert len(level_one_qm_basis(12, 6)) == 2 + 1 + 1 + 1 + 1 + 0 + 1
    assert len(level_one_qm_basis(2, 1)) == 1


def test_depth_and_weight():
    f = G2 * G2 * G4 + G4 * G4
    assert f.weight == 8 and f.depth == 2
    assert (f - G2 * G2 * G4).depth == 0
    assert QuasiModularForm.zero(6).weight == 6


def test_inhomogeneous_sum_rejected():
    with pytest.raises(ValueError):
        G4 + G6


def test_json_round_trip():
    f = G2**3 * G6 - DELTA * Fraction(3, 4) + G2 * G4 * qm_dslash(G6, Mat2Q.of(2, 1, 0, 1))
    g = QuasiModularForm.from_json(f.to_json())
    assert g.equals(f) and g.weight == f.weight and g.level == f.level


def test_dslash_of_g2_is_coefficientwise():
    alpha = Mat2Q.of(1, 0, 0, 2)
    image = qm_dslash(G2, alpha)
    # the double slash keeps the G2 variable and only moves coefficients
    assert image.equals(G2)
    assert qm_dslash(G2 * G4, alpha).equals(G2 * qm_dslash(G4, alpha))


def test_x_and_y_basics():
    assert op_X(G2).is_zero()
    assert op_X(G4).equals(G6 * Fraction(7, 10))
    assert op_X(DELTA).is_zero()
    assert op_Y(G2 * G4).equals(G2 * G4 * 2)
    assert op_Y(G6).equals(G6 * 3)


def test_w_t_e():
    f = G2**2 * G4 + G2 * G6
    assert op_W(1, f).equals(G2 * G4 * 2 + G6)
    assert op_W(2, f).equals(G2**2 * G4 * 2 + G2 * G6)
    assert op_W(3, f).equals(G2**3 * G4 * 2 + G2**2 * G6)
    assert op_W(2, G4).is_zero()
    assert op_E(f).equals(f * G4)
    assert op_T(2, 1, f).equals(op_W(2, f) * G4)
    with pytest.raises(ValueError):
        op_W(0, f)


@pytest.mark.parametrize("k1,l1,k2,l2", [(1, 0, 3, 0), (1, 1, 2, 2), (2, 0, 4, 1), (3, 2, 4, 0), (4, 1, 4, 2)])
def test_t_commutators(k1, l1, k2, l2):
    rng = random.Random(k1 * 100 + k2)
    f = random_qm(rng, 8, 1, 3)
    lhs = op_T(k1, l1, op_T(k2, l2, f)) - op_T(k2, l2, op_T(k1, l1, f))
    if k1 + k2 - 2 >= 1:
        rhs = op_T(k1 + k2 - 2, l1 + l2, f) * (k2 - k1)
    else:
        rhs = QuasiModularForm.zero(lhs.weight)
    assert lhs.equals(rhs)


@pytest.mark.parametrize("k,l", [(1, 0), (2, 1), (3, 0), (4, 2)])
def test_t_d_commutator(k, l):
    f = random_qm(random.Random(k + 10 * l), 6, 1, 3)
    lhs = op_T(k, l, op_D(f)) - op_D(op_T(k, l, f))
    rhs = op_T(k + 1, l, f) * Fraction(-(k - 3), 2)
    if k > 1:
        rhs = rhs + op_T(k - 1, l + 1, f) * (Fraction(5, 24) * (k - 1))
    assert lhs.equals(rhs)


def test_yx_commutator():
    for seed in range(5):
        f = random_qm(random.Random(seed), 6, 1, 2)
        assert (op_Y(op_X(f)) - op_X(op_Y(f))).equals(op_X(f))


@pytest.mark.parametrize("level", [1, 2])
def test_slash_lemmas(level):
    rng = random.Random(level)
    alpha = Mat2Q.of(1, 1, 0, 3) if level == 1 else Mat2Q.of(3, 1, 2, 1)
    f = random_qm(rng, 6, level, 2)
    with working_precision(12):
        lhs = qm_dslash(op_D(f), alpha)
        rhs = op_D(qm_dslash(f, alpha)) + qm_scale_by_form(qm_dslash(op_W(1, f), alpha), nu_expr(alpha, 1))
        assert lhs.equals(rhs)
        assert qm_dslash(op_Y(f), alpha).equals(op_Y(qm_dslash(f, alpha)))


def test_g2_power_level():
    assert g2_power(0, 3).equals(QuasiModularForm.constant(1, 3))
    assert g2_power(2, 2).level == 2
