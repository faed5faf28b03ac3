"""Stern-Brocot levels, interval partitions and the {A, B} coding of [0, 1).

Endpoints are kept as exact integers.  Whole levels are stored as pairs of
``int64`` numpy arrays (numerators, denominators); at order ``n`` the
denominators are bounded by ``fib(n + 2)``, so everything up to the depth
cap is exact.  Python :class:`~fractions.Fraction` objects are produced only
on request.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np

from .cont_frac import CFWord, ContractViolation, DomainError

__all__ = [
    "DEFAULT_DEPTH_CAP",
    "DepthCapError",
    "SternBrocotLevel",
    "Interval",
    "level",
    "intervals",
    "iter_intervals",
    "iter_level_chunks",
    "locate",
    "word_to_interval",
    "interval_word",
    "siblings",
]

DEFAULT_DEPTH_CAP = 26
# int64 denominators stay exact far beyond any usable cap (fib(90) < 2**63)
_HARD_CAP = 88


class DepthCapError(RuntimeError):
    """Requested order exceeds the configured depth cap."""


def _check_depth(n: int, cap: int | None) -> None:
    if n < 0:
        raise ValueError(f"order must be nonnegative, got {n}")
    cap = DEFAULT_DEPTH_CAP if cap is None else cap
    if n > cap or n > _HARD_CAP:
        raise DepthCapError(f"order {n} exceeds depth cap {min(cap, _HARD_CAP)}")


@dataclass(frozen=True)
class Interval:
    """Half-open Stern-Brocot interval ``[left, right)`` of order ``order``, index ``index`` (1-based)."""

    left: Fraction
    right: Fraction
    order: int
    index: int

    @property
    def length(self) -> Fraction:
        return self.right - self.left

    def __contains__(self, x) -> bool:
        return self.left <= x < self.right


@dataclass(frozen=True, eq=False)
class SternBrocotLevel:
    order: int
    numerators: np.ndarray
    denominators: np.ndarray

    def __len__(self) -> int:
        return len(self.denominators)

    @property
    def fractions(self) -> list[Fraction]:
        return [Fraction(int(s), int(t)) for s, t in zip(self.numerators, self.denominators)]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SternBrocotLevel)
            and self.order == other.order
            and np.array_equal(self.numerators, other.numerators)
            and np.array_equal(self.denominators, other.denominators)
        )


def _refine(num: np.ndarray, den: np.ndarray, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Insert mediants between consecutive endpoints ``steps`` times."""
    for _ in range(steps):
        m = len(num)
        new_num = np.empty(2 * m - 1, dtype=np.int64)
        new_den = np.empty(2 * m - 1, dtype=np.int64)
        new_num[0::2] = num
        new_den[0::2] = den
        new_num[1::2] = num[:-1] + num[1:]
        new_den[1::2] = den[:-1] + den[1:]
        num, den = new_num, new_den
    return num, den


@lru_cache(maxsize=24)
def _level_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n == 0:
        num, den = np.array([0, 1], dtype=np.int64), np.array([1, 1], dtype=np.int64)
    else:
        prev_num, prev_den = _level_arrays(n - 1)
        num, den = _refine(prev_num, prev_den, 1)
    num.setflags(write=False)
    den.setflags(write=False)
    return num, den


def level(n: int, cap: int | None = None) -> SternBrocotLevel:
    """The ordered Stern-Brocot sequence of order ``n`` (``2**n + 1`` fractions in [0, 1])."""
    _check_depth(n, cap)
    num, den = _level_arrays(n)
    return SternBrocotLevel(n, num, den)


def iter_level_chunks(
    n: int, chunk_order: int = 16, cap: int | None = None
) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Stream the endpoints of order ``n`` in consecutive overlapping chunks.

    Yields ``(first_index, numerators, denominators)`` where each chunk holds
    ``2**min(n, chunk_order) + 1`` endpoints and shares its last endpoint with
    the first endpoint of the next chunk.  ``first_index`` is the 1-based index
    of the first interval of the chunk.  The decomposition depends only on
    ``n`` and ``chunk_order``.
    """
    _check_depth(n, cap)
    top = max(0, n - chunk_order)
    top_num, top_den = _level_arrays(top) if top <= 20 else _refine(*_level_arrays(20), top - 20)
    steps = n - top
    width = 2**steps
    for j in range(len(top_den) - 1):
        num, den = _refine(top_num[j : j + 2].copy(), top_den[j : j + 2].copy(), steps)
        yield j * width + 1, num, den


def intervals(n: int, cap: int | None = None) -> list[Interval]:
    """All ``2**n`` intervals of order ``n``, left to right."""
    return list(iter_intervals(n, cap=cap))


def iter_intervals(n: int, cap: int | None = None) -> Iterator[Interval]:
    """Intervals of order ``n`` in increasing left-endpoint order, generated lazily."""
    for first, num, den in iter_level_chunks(n, cap=cap):
        s = [int(v) for v in num]
        t = [int(v) for v in den]
        for i in range(len(t) - 1):
            yield Interval(Fraction(s[i], t[i]), Fraction(s[i + 1], t[i + 1]), n, first + i)


def locate(x, n: int) -> tuple[Interval, str]:
    """The order-``n`` interval containing ``x`` and its {A, B} address.

    Descends by mediant bisection, so the cost is ``n`` exact big-integer
    steps.  Letter ``i`` is ``A`` when the order-``i`` interval is the left
    child of its parent.  ``x`` may be a Fraction, an int, a float (taken as
    its exact binary value) or a decimal string.
    """
    if n < 0:
        raise ValueError(f"order must be nonnegative, got {n}")
    x = Fraction(x)
    if not 0 <= x < 1:
        raise DomainError(f"locate needs 0 <= x < 1, got {x}")
    xs, xt = x.numerator, x.denominator
    ls, lt, rs, rt = 0, 1, 1, 1
    index = 1
    letters = []
    for _ in range(n):
        ms, mt = ls + rs, lt + rt
        # x < ms/mt  <=>  xs*mt < ms*xt (denominators positive)
        if xs * mt < ms * xt:
            letters.append("A")
            rs, rt = ms, mt
            index = 2 * index - 1
        else:
            letters.append("B")
            ls, lt = ms, mt
            index = 2 * index
    return Interval(Fraction(ls, lt), Fraction(rs, rt), n, index), "".join(letters)


# Moebius maps as integer matrices [[a, b], [c, d]] : x -> (a x + b)/(c x + d)
_A = (1, 0, 1, 1)  # x / (x + 1)
_B = (0, 1, -1, 2)  # 1 / (2 - x)


def _matmul(m, k):
    a, b, c, d = m
    e, f, g, h = k
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def word_to_interval(word: str) -> Interval:
    """Image of ``[0, 1)`` under the composition ``w1 o w2 o ... o wn`` of the maps A, B."""
    m = (1, 0, 0, 1)
    index = 1
    for letter in word:
        if letter == "A":
            m = _matmul(m, _A)
            index = 2 * index - 1
        elif letter == "B":
            m = _matmul(m, _B)
            index = 2 * index
        else:
            raise DomainError(f"letters must be 'A' or 'B', got {letter!r}")
    a, b, c, d = m
    # both maps preserve orientation, so 0 -> left end and 1 -> right end
    return Interval(Fraction(b, d), Fraction(a + b, c + d), len(word), index)


def interval_word(order: int, index: int) -> str:
    """Address of ``T_{order,index}``: bits of ``index - 1`` with A = 0, B = 1."""
    if not 1 <= index <= 2**order:
        raise ValueError(f"index {index} out of range for order {order}")
    if order == 0:
        return ""
    return format(index - 1, f"0{order}b").translate(str.maketrans("01", "AB"))


def siblings(parent: CFWord) -> tuple[CFWord, CFWord]:
    """The two new neighbours one order deeper of a canonical word ``[a1, ..., am]``.

    Returns ``([a1, ..., a_m + 1], [a1, ..., a_m - 1, 2])``.
    """
    d = tuple(parent)
    if not d or d[-1] < 2:
        raise ContractViolation(f"siblings needs a canonical word (last digit >= 2), got {list(d)}")
    return CFWord(d[:-1] + (d[-1] + 1,)), CFWord(d[:-1] + (d[-1] - 1, 2))
