import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mfsb import cont_frac as cf
from mfsb.cont_frac import CFWord, DomainError, RunLengthWord
from mfsb.core import GAMMA, fib

F = Fraction
digits = st.lists(st.integers(1, 50), min_size=1, max_size=25).map(lambda d: tuple(d[:-1]) + (d[-1] + 1,))


@pytest.mark.parametrize("x, word", [(F(2, 5), (2, 2)), (F(1, 3), (3,)), (F(3, 5), (1, 1, 2))])
def test_cf_expand_examples(x, word):
    w = cf.cf_expand(x)
    assert w.digits == word and w.canonical and w.value == x


def test_cf_expand_domain():
    for bad in (F(0), F(1), F(3, 2)):
        with pytest.raises(DomainError):
            cf.cf_expand(bad)
    with pytest.raises(DomainError):
        CFWord((1, 0))


@given(digits)
def test_expand_inverts_value(d):
    assert cf.cf_expand(cf.cf_value(d)).digits == d


def test_convergents_examples():
    t = cf.convergents((1, 1, 1, 1, 1))
    assert t.q == (1, 1, 2, 3, 5, 8)
    assert cf.convergents((2, 2)).pairs()[2] == (2, 5)
    assert cf.convergents((7,)).q[1] == 7


@given(digits)
def test_convergents_unimodular(d):
    t = cf.convergents(d)
    for k in range(1, len(d) + 1):
        assert t.p[k] * t.q[k - 1] - t.p[k - 1] * t.q[k] == (-1) ** (k + 1)
        assert t.fraction(k) == cf.cf_value(d[:k])
    assert t.q[-1] == cf.continuant(d)


def test_golden_denominators_are_fibonacci():
    t = cf.convergents((1,) * 40)
    assert list(t.q) == [fib(k + 1) for k in range(41)]
    assert all(q <= GAMMA**k for k, q in enumerate(t.q))


def test_enumerate_akn_examples():
    assert [w.digits for w in cf.enumerate_Akn(4, 2)] == [(1, 3), (2, 2)]
    for n in range(2, 10):
        assert [w.digits for w in cf.enumerate_Akn(n, 1)] == [(n,)]
        for k in range(1, n):
            words = list(cf.enumerate_Akn(n, k))
            assert len(words) == cf.count_Akn(n, k) == math.comb(n - 2, k - 1)
            assert all(w.digit_sum == n and len(w) == k and w.canonical for w in words)
            assert words == sorted(words, key=lambda w: w.digits)
    assert list(cf.enumerate_Akn(1, 1)) == []


def test_gauss_map_examples():
    assert cf.gauss_map(CFWord((2, 2))).digits == (2,)
    assert cf.gauss_map(F(2, 5)) == F(1, 2)
    assert cf.gauss_map(F(1, 3)) == 0
    g = GAMMA - 1
    assert abs(cf.gauss_map(g) - g) < 1e-12
    with pytest.raises(DomainError):
        cf.gauss_map(F(0))


def test_farey_map_examples():
    assert cf.farey_map(F(1, 3)) == F(1, 2)
    assert cf.farey_map(F(1, 2)) == 1
    assert cf.farey_branch(F(1, 3)) == 1 and cf.farey_branches(F(2, 3)) == 2
    assert cf.farey_map(CFWord((3,))).digits == (2,)
    assert cf.farey_map(CFWord((1, 2))).digits == (2,)


@given(digits)
def test_farey_word_matches_value(d):
    w = CFWord(d)
    assert cf.farey_map(w).value == cf.farey_map(w.value)


@given(digits)
def test_gauss_is_induced_farey(d):
    # a1 Farey steps: a1 - 1 on the left branch, then one on the right
    x = cf.cf_value(d)
    for _ in range(d[0]):
        x = cf.farey_map(x)
    assert x == cf.gauss_map(cf.cf_value(d))


def test_runlength_examples():
    assert cf.runlength_to_cf(RunLengthWord("A", (1, 2))).digits == (2, 2)
    b = cf.runlength_to_cf(RunLengthWord("B", (1, 1)))
    assert b.digits == (1, 1, 1) and b.truncated and not b.canonical
    assert cf.cf_to_runlength((2, 2)) == RunLengthWord("A", (1, 2))
    assert cf.flatten(RunLengthWord("A", (1, 2))) == "ABB"
    with pytest.raises(DomainError):
        RunLengthWord("C", (1,))
    with pytest.raises(DomainError):
        cf.cf_to_runlength((1,))


def test_mirror_examples():
    w = RunLengthWord("A", (1, 2))
    m = cf.mirror(w)
    assert m == RunLengthWord("B", (1, 2))
    assert cf.runlength_to_cf(m).value == F(3, 5) == 1 - F(2, 5)
    assert cf.mirror(CFWord((2, 2))).digits == (1, 1, 2)
    assert cf.mirror("ABB") == "BAA"


@given(st.sampled_from("AB"), st.lists(st.integers(1, 9), min_size=1, max_size=10))
def test_runlength_mirror_identity(lead, blocks):
    w = RunLengthWord(lead, tuple(blocks))
    assert cf.cf_to_runlength(cf.runlength_to_cf(w)) == w
    assert cf.runlength_to_cf(cf.mirror(w)).value == 1 - cf.runlength_to_cf(w).value


@given(digits)
def test_runlength_word_locates_value(d):
    # the flattened coding of [a1..ak] is the address of its value one order
    # before it becomes a vertex; the point lies in that interval's closure
    w = cf.cf_to_runlength(d)
    word = cf.flatten(w)
    from mfsb.stern_brocot import word_to_interval

    iv = word_to_interval(word[:-1])
    assert iv.left <= cf.cf_value(d) <= iv.right


def test_cf_expand_interval_certifies():
    lo, hi = F(41, 100), F(42, 100)
    w = cf.cf_expand_interval(lo, hi, 10)
    assert w.truncated
    assert cf.cf_expand(lo).digits[: len(w)] == w.digits
    assert cf.cf_expand(hi).digits[: len(w)] == w.digits


def test_cf_expand_real():
    w = cf.cf_expand_real("0.6180339887498948482045868343656")
    assert set(w.digits) == {1} and len(w) >= 60 and w.truncated
    # a short decimal is an interval wide enough to leave the first digit uncertain
    assert len(cf.cf_expand_real("0.5")) == 0
    assert cf.cf_expand_real(0.5).digits == (2,)
    with pytest.raises(DomainError):
        cf.cf_expand_real("1.5")


def test_word_json_roundtrip():
    w = CFWord((3, 1, 4))
    assert CFWord.from_json(w.to_json()) == w
    assert RunLengthWord.from_dict(RunLengthWord("B", (2, 3)).to_dict()) == RunLengthWord("B", (2, 3))
