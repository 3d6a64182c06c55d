import math
import random
from fractions import Fraction

import pytest

from qmhecke import heckealg as hk
from qmhecke.errors import CovarianceViolation, DepthNotZero, LevelMismatch, TwistMismatch
from qmhecke.exactq import PuiseuxSeries
from qmhecke.forms import delta, eisenstein, eisenstein_level_form, working_precision
from qmhecke.lattice import Mat2Q, coset_key, sl2_order
from qmhecke.quasimod import G2, QuasiModularForm
from qmhecke.sampling import random_generated_op, random_op, random_qm

G4 = QuasiModularForm.modular(eisenstein(4))
G6 = QuasiModularForm.modular(eisenstein(6))
DELTA = QuasiModularForm.modular(delta())


def _classical_hecke(coeffs, n, k):
    """b(m) = sum_{d | (m, n)} d^(k-1) a(mn/d^2), on a list of level-one coefficients."""
    out = []
    for m in range(len(coeffs) // n):
        total = Fraction(0)
        for d in range(1, n + 1):
            if n % d == 0 and math.gcd(m, n) % d == 0:
                total += d ** (k - 1) * coeffs[m * n // (d * d)]
        out.append(total)
    return out


def _rational_coeffs(s, count):
    return [s.coefficient(i).to_fraction() for i in range(count)]


def test_tn_support():
    for n, count in ((1, 1), (2, 3), (3, 4), (4, 7), (6, 12)):
        op = hk.tn_op(n)
        assert len(op.support()) == count
        assert all(v.equals(QuasiModularForm.constant(1)) for _, v in op.items())
    assert len(hk.tn_op(2, 2).support()) == 3 * sl2_order(2)


@pytest.mark.parametrize("n", [2, 3, 5])
@pytest.mark.parametrize("form,weight", [("g4", 4), ("g4g6", 10), ("delta", 12), ("mixed", 12)])
def test_action_matches_classical_hecke(n, form, weight):
    f = {
        "g4": G4,
        "g4g6": G4 * G6,
        "delta": DELTA,
        "mixed": DELTA * 3 - G6 * G6 * Fraction(1, 2),
    }[form]
    count = 6
    with working_precision(count * n):
        image = hk.act_on_form(hk.tn_op(n), f).expansion(count)
        classical = _classical_hecke(_rational_coeffs(f.expansion(count * n), count * n), n, weight)
    scale = Fraction(n) ** (1 - weight // 2)
    assert image == PuiseuxSeries.from_integer_coeffs([c * scale for c in classical])


def test_delta_eigenvalues():
    taus = {}
    for n in (2, 3, 6):
        image = hk.act_on_form(hk.tn_op(n), DELTA)
        lam = (image.expansion(2).coefficient(1) / DELTA.expansion(2).coefficient(1)).to_fraction()
        assert image.equals(DELTA * lam)
        taus[n] = lam * n**5
    assert taus == {2: -24, 3: 252, 6: -6048}
    assert taus[2] * taus[3] == taus[6]


def test_g4_eigenvalue():
    image = hk.act_on_form(hk.tn_op(2), G4)
    # normalised eigenvalue sigma_3(2) / 2
    assert image.equals(G4 * Fraction(9, 2))


def test_multiplicativity_level_one():
    assert hk.star(hk.tn_op(2), hk.tn_op(3)).equals(hk.tn_op(6))
    assert hk.star(hk.tn_op(3), hk.tn_op(2)).equals(hk.tn_op(6))


def test_t2_squared():
    # T2 * T2 = T4 + 2 [2I]: the scalar coset is reached three times
    scalar = hk.make_op(1, hk.IDENTITY, [(Mat2Q.scalar(2), QuasiModularForm.constant(1))])
    assert hk.star(hk.tn_op(2), hk.tn_op(2)).equals(hk.tn_op(4) + scalar * 2)


@pytest.mark.parametrize("level", [2, 3])
def test_multiplicativity_picks_up_index(level):
    # each level-N class of determinant 6 is reached once per class of SL2(Z/N)
    prod = hk.star(hk.tn_op(2, level), hk.tn_op(5 if level == 3 else 3, level))
    target = hk.tn_op(10 if level == 3 else 6, level)
    assert prod.equals(target * sl2_order(level))


@pytest.mark.parametrize("level", [1, 2])
def test_unit(level):
    e = hk.identity_op(level)
    F = random_op(random.Random(level), level, weight=2)
    assert hk.star(e, F).equals(F)
    assert hk.star(F, e).equals(F)
    f = random_qm(random.Random(4), 6, level)
    assert hk.act_on_form(e, f).equals(f)


@pytest.mark.parametrize("seed", range(3))
def test_star_associativity(seed):
    rng = random.Random(seed)
    F, G, H = (random_generated_op(rng) for _ in range(3))
    assert hk.star(hk.star(F, G), H).equals(hk.star(F, hk.star(G, H)))


@pytest.mark.parametrize("seed", range(3))
def test_star_r_associativity(seed):
    rng = random.Random(seed)
    A, B, C = (random_op(rng, 2, weight=w, bases=1, dets=(1, 2)) for w in (0, 2, 4))
    assert hk.star_r(hk.star_r(A, B), C).equals(hk.star_r(A, hk.star_r(B, C)))


def test_module_law():
    rng = random.Random(9)
    F, G = random_generated_op(rng), random_generated_op(rng)
    f = random_qm(rng, 4, 1, 2)
    assert hk.act_on_form(hk.star(F, G), f).equals(hk.act_on_form(F, hk.act_on_form(G, f)))


def test_products_are_covariant():
    rng = random.Random(2)
    for level in (1, 2):
        F, G = random_op(rng, level, weight=2), random_op(rng, level, weight=0)
        assert hk.check_covariance(hk.star(F, G), samples=10) is None


def test_covariance_detects_truncated_orbit():
    key = coset_key(Mat2Q.of(1, 0, 0, 2), 1)
    broken = hk.TwistedHeckeOp(1, hk.IDENTITY, {key: G4})
    assert hk.check_covariance(broken, samples=20) is not None


def test_make_op_rejects_unfixed_value():
    # the trivial coset is fixed by all of SL2(Z), but G4 | diag(1, 3) is not
    value = QuasiModularForm.modular(eisenstein(4).slash(Mat2Q.of(1, 0, 0, 3)))
    with pytest.raises(CovarianceViolation):
        hk.make_op(1, hk.IDENTITY, [(Mat2Q.identity(), value)], samples=50)
    level_two = QuasiModularForm.modular(eisenstein_level_form(4, 0, 1, 2), 2)
    assert not hk.make_op(2, hk.IDENTITY, [(Mat2Q.identity(), level_two)]).is_zero()


def test_embedding_rejects_depth():
    with pytest.raises(DepthNotZero):
        hk.embed_modular(1, [(Mat2Q.of(1, 0, 0, 2), G2 * G2)])
    op = hk.embed_modular(1, [(Mat2Q.of(1, 0, 0, 2), eisenstein(4))])
    assert hk.embed_op(op) is op
    assert all(v.depth == 0 for _, v in hk.star(op, op).items())


def test_level_and_twist_mismatch():
    with pytest.raises(LevelMismatch):
        hk.star(hk.tn_op(2, 1), hk.tn_op(2, 2))
    twisted = hk.TwistedHeckeOp(1, Mat2Q.of(1, 1, 0, 1), {coset_key(Mat2Q.identity(), 1): QuasiModularForm.constant(1)})
    with pytest.raises(TwistMismatch):
        hk.star(twisted, hk.tn_op(2))


def test_json_round_trip():
    F = random_op(random.Random(3), 2, Mat2Q.of(0, -1, 1, 0), weight=2)
    G = hk.TwistedHeckeOp.from_json(F.to_json())
    assert G.equals(F) and G.twist == F.twist and G.level == F.level


def test_lifts_are_pointwise():
    F = hk.make_op(1, hk.IDENTITY, [(Mat2Q.of(1, 0, 0, 2), G2 * G4)])
    y = hk.lift_Y(F)
    for key, value in F.items():
        # G2 times a weight-4 coefficient has half weight 2
        assert y.value(key).equals(value * 2)
    assert hk.lift_X(F).weight == 8


def test_phi_and_delta_vanish_on_sl2z_cosets():
    e = hk.identity_op()
    assert hk.lift_phi(1, e).is_zero()
    assert hk.lift_delta(1, e).is_zero()
    assert hk.lift_delta(2, hk.tn_op(1)).is_zero()
    assert not hk.lift_delta(1, hk.tn_op(2)).is_zero()
