import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qmhecke.errors import GuardExceeded, NotPositiveDet
from qmhecke.lattice import (
    CongruenceLevel,
    CosetKey,
    Mat2Q,
    coset_key,
    gamma_membership,
    hecke_coset_reps,
    hnf_decompose,
    lift_sl2,
    reconstruct,
    right_orbit,
    sl2_order,
)

entries = st.fractions(min_value=-6, max_value=6, max_denominator=4)


@st.composite
def gl2_plus(draw):
    m = Mat2Q.of(*(draw(entries) for _ in range(4)))
    assume(m.det() > 0)
    return m


def _sigma1(n):
    return sum(d for d in range(1, n + 1) if n % d == 0)


@given(gl2_plus())
@settings(max_examples=150, deadline=None)
def test_decomposition_reconstructs(m):
    dec = hnf_decompose(m)
    a, b, d = dec.hnf
    assert a > 0 and d > 0 and 0 <= b < d
    assert dec.unimodular.is_unimodular()
    assert dec.unimodular @ dec.upper == m


@given(gl2_plus(), st.sampled_from([1, 2, 3, 4]), st.integers(0, 10_000))
@settings(max_examples=100, deadline=None)
def test_coset_key_is_left_invariant(m, n, seed):
    gamma = CongruenceLevel(n).random_element(random.Random(seed))
    assert gamma_membership(gamma, n)
    assert coset_key(gamma @ m, n) == coset_key(m, n)
    assert coset_key(reconstruct(coset_key(m, n)), n) == coset_key(m, n)


def test_distinct_cosets_get_distinct_keys():
    s = Mat2Q.of(0, -1, 1, 0)
    assert coset_key(s, 1) == coset_key(Mat2Q.identity(), 1)
    assert coset_key(s, 2) != coset_key(Mat2Q.identity(), 2)
    assert coset_key(Mat2Q.of(2, 0, 0, 1), 1) != coset_key(Mat2Q.of(1, 0, 0, 2), 1)


def test_scalar_matrices():
    key = coset_key(Mat2Q.scalar(Fraction(3, 2)), 1)
    assert key.scale == Fraction(3, 2) and key.hnf == (1, 0, 1)
    assert key.det() == Fraction(9, 4)
    assert not key.in_sl2z()


def test_key_json_round_trip():
    key = coset_key(Mat2Q.of(1, 2, 3, 8), 3)
    assert CosetKey.from_json(key.to_json()) == key


def test_group_orders():
    assert [sl2_order(n) for n in (1, 2, 3, 4, 5, 6)] == [1, 6, 24, 48, 120, 144]
    for n in (2, 3, 4):
        assert len(CongruenceLevel(n).coset_reps()) == sl2_order(n)


@pytest.mark.parametrize("n", [2, 3, 5, 6])
def test_lift_reduces_to_class(n):
    for cls in CongruenceLevel(n).quotient_elements():
        m = lift_sl2(cls, n)
        assert m.is_unimodular()
        assert m.mod(n) == cls


@pytest.mark.parametrize("n,level", [(2, 1), (3, 1), (4, 1), (6, 1), (2, 2), (3, 2), (2, 3)])
def test_hecke_coset_counts(n, level):
    keys = hecke_coset_reps(n, level)
    assert len(keys) == _sigma1(n) * sl2_order(level)
    assert all(k.det() == n for k in keys)


def test_hecke_guard():
    with pytest.raises(GuardExceeded):
        hecke_coset_reps(6, 4, guard=100)


def test_nonpositive_determinant():
    with pytest.raises(NotPositiveDet):
        hnf_decompose(Mat2Q.of(0, 1, 1, 0))


@pytest.mark.parametrize("level", [1, 2, 3])
def test_right_orbit_witnesses(level):
    rep = Mat2Q.of(1, 1, 0, 2)
    key = coset_key(rep, level)
    orbit = right_orbit(key, level)
    assert any(k == key for k, _ in orbit)
    for k, gamma in orbit:
        assert gamma_membership(gamma, level)
        assert coset_key(reconstruct(key) @ gamma, level) == k
    if level == 1:
        # the double coset of diag(1, 2) splits into three left cosets
        assert len(orbit) == 3


def test_right_orbit_is_closed():
    level = 2
    rep = Mat2Q.of(2, 0, 0, 1)
    points = {k for k, _ in right_orbit(coset_key(rep, level), level)}
    rng = random.Random(5)
    for _ in range(20):
        gamma = CongruenceLevel(level).random_element(rng)
        assert coset_key(rep @ gamma, level) in points
