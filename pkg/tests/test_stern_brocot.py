from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mfsb.cont_frac import CFWord, ContractViolation, DomainError
from mfsb.core import GAMMA, fib
from mfsb.stern_brocot import (
    DepthCapError,
    interval_word,
    intervals,
    iter_intervals,
    iter_level_chunks,
    level,
    locate,
    siblings,
    word_to_interval,
)

F = Fraction


def test_level_examples():
    assert level(0).fractions == [F(0), F(1)]
    assert level(2).fractions == [F(0), F(1, 3), F(1, 2), F(2, 3), F(1)]
    for n in range(12):
        assert len(level(n)) == 2**n + 1


def test_level_refines_previous():
    for n in range(1, 12):
        assert level(n).fractions[::2] == level(n - 1).fractions


def test_intervals_examples():
    assert [(i.left, i.right) for i in intervals(1)] == [(F(0), F(1, 2)), (F(1, 2), F(1))]
    ends = sorted({i.left for i in intervals(3)} | {F(1)})
    assert ends == [F(0), F(1, 4), F(1, 3), F(2, 5), F(1, 2), F(3, 5), F(2, 3), F(3, 4), F(1)]
    lengths = [i.length for i in intervals(10)]
    assert min(lengths) == F(1, 89 * 144)
    assert max(lengths) == F(1, 11)


def test_interval_is_half_open():
    iv = intervals(2)[1]
    assert iv.left in iv and iv.right not in iv


def test_chunks_cover_level():
    for n, chunk in ((10, 3), (12, 12), (7, 16)):
        num = []
        den = []
        for first, s, t in iter_level_chunks(n, chunk_order=chunk):
            assert first == len(den) + 1 - (1 if den else 0) or first == len(den)
            start = 1 if den else 0
            num.extend(s.tolist()[start:])
            den.extend(t.tolist()[start:])
        lv = level(n)
        assert num == lv.numerators.tolist()
        assert den == lv.denominators.tolist()


def test_iter_intervals_matches_list():
    assert list(iter_intervals(9)) == intervals(9)


def test_depth_cap():
    with pytest.raises(DepthCapError):
        level(27)
    with pytest.raises(DepthCapError):
        level(8, cap=5)
    with pytest.raises(ValueError):
        level(-1)


def test_locate_examples():
    iv, w = locate(F(2, 5), 3)
    assert (iv.left, iv.right, w) == (F(2, 5), F(1, 2), "ABB")
    for n in range(1, 15):
        iv, w = locate(0, n)
        assert (iv.left, iv.right, w) == (F(0), F(1, n + 1), "A" * n)


def test_locate_golden():
    x = F(GAMMA - 1)
    for n in range(1, 30):
        iv, w = locate(x, n)
        assert w == ("B" + "AB" * n)[:n]
        assert iv.length == F(1, fib(n + 1) * fib(n + 2))


def test_locate_rejects_outside():
    with pytest.raises(DomainError):
        locate(F(1), 3)
    with pytest.raises(DomainError):
        locate(F(-1, 2), 3)


def test_word_to_interval_examples():
    a, b, abb = word_to_interval("A"), word_to_interval("B"), word_to_interval("ABB")
    assert (a.left, a.right) == (F(0), F(1, 2))
    assert (b.left, b.right) == (F(1, 2), F(1))
    assert (abb.left, abb.right) == (F(2, 5), F(1, 2))
    assert abb == locate(F(2, 5), 3)[0]
    with pytest.raises(DomainError):
        word_to_interval("AC")


@given(st.text(alphabet="AB", max_size=40))
def test_word_interval_roundtrip(word):
    iv = word_to_interval(word)
    assert iv.right.numerator * iv.left.denominator - iv.left.numerator * iv.right.denominator == 1
    assert locate(iv.left, len(word)) == (iv, word)
    if word:
        assert interval_word(len(word), iv.index) == word


@pytest.mark.parametrize(
    "parent, expected",
    [
        ((2,), ((3,), (1, 2))),
        ((3,), ((4,), (2, 2))),
        ((1, 2), ((1, 3), (1, 1, 2))),
    ],
)
def test_siblings_examples(parent, expected):
    a, b = siblings(CFWord(parent))
    assert (a.digits, b.digits) == expected


def test_siblings_values():
    a, b = siblings(CFWord((1, 2)))
    assert (a.value, b.value) == (F(3, 4), F(3, 5))


def test_siblings_needs_canonical():
    with pytest.raises(ContractViolation):
        siblings(CFWord((2, 1), truncated=True))


def test_level_arrays_are_read_only():
    lv = level(5)
    with pytest.raises(ValueError):
        lv.denominators[0] = 7
    assert lv.denominators.dtype == np.int64
