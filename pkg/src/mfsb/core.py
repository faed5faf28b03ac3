"""Exact rational helpers, Fibonacci numbers, constants and stable log-sums.

Rationals are the stdlib :class:`fractions.Fraction` (always reduced, big
integer numerator and denominator).  Floating point only enters through
:func:`log_fraction` and the log-sum-exp helpers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Fraction",
    "CONSTANTS",
    "Constants",
    "GAMMA",
    "TWO_LOG_GAMMA",
    "CHI",
    "RHO",
    "LOG2",
    "mediant",
    "fib",
    "fib_list",
    "binet",
    "log_fraction",
    "log_sum_exp",
    "LogSumExp",
    "GoldenInt",
    "fmt_float",
]


@dataclass(frozen=True)
class Constants:
    gamma: float
    two_log_gamma: float
    chi: float
    rho: float


GAMMA = (1.0 + math.sqrt(5.0)) / 2.0
TWO_LOG_GAMMA = 2.0 * math.log(GAMMA)
CHI = math.pi**2 / (6.0 * math.log(2.0))
RHO = 1.0 - GAMMA**-6
LOG2 = math.log(2.0)

CONSTANTS = Constants(gamma=GAMMA, two_log_gamma=TWO_LOG_GAMMA, chi=CHI, rho=RHO)


def fmt_float(x: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def mediant(a: Fraction, b: Fraction) -> Fraction:
    """Return ``(a.num + b.num) / (a.den + b.den)`` in lowest terms."""
    return Fraction(a.numerator + b.numerator, a.denominator + b.denominator)


_FIB = [0, 1]


def fib(k: int) -> int:
    """k-th Fibonacci number with ``fib(0) = 0`` and ``fib(1) = 1``."""
    if k < 0:
        raise ValueError(f"fib index must be nonnegative, got {k}")
    while len(_FIB) <= k:
        _FIB.append(_FIB[-1] + _FIB[-2])
    return _FIB[k]


def fib_list(k: int) -> list[int]:
    fib(k)
    return _FIB[: k + 1]


def binet(k: int) -> float:
    """Floating point Binet approximation ``gamma**k / sqrt(5)``."""
    return GAMMA**k / math.sqrt(5.0)


def log_fraction(x: Fraction | int) -> float:
    """Natural log of a positive rational, safe for huge numerators/denominators."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("log of a nonpositive rational")
    # math.log accepts arbitrary ints without overflowing
    return math.log(x.numerator) - math.log(x.denominator)


def log_sum_exp(values: Sequence[float] | np.ndarray | Iterable[float]) -> float:
    """``log(sum(exp(v)))`` computed after shifting by the maximum."""
    v = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    if v.size == 0:
        raise ValueError("log_sum_exp of an empty sequence")
    m = float(np.max(v))
    if math.isinf(m):
        return m
    return m + math.log(math.fsum(np.exp(v - m)))


class LogSumExp:
    """Mergeable accumulator for log-domain sums.

    Holds ``(shift, total)`` with the represented value ``shift + log(total)``.
    Chunks are folded in with :meth:`add` and partial accumulators combined
    with :meth:`merge`; the result depends only on the order of calls.
    """

    __slots__ = ("shift", "total")

    def __init__(self) -> None:
        self.shift = -math.inf
        self.total = 0.0

    def add(self, values: np.ndarray) -> "LogSumExp":
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            return self
        m = float(np.max(v))
        return self._fold(m, math.fsum(np.exp(v - m)))

    def merge(self, other: "LogSumExp") -> "LogSumExp":
        if other.total == 0.0:
            return self
        return self._fold(other.shift, other.total)

    def _fold(self, shift: float, total: float) -> "LogSumExp":
        if self.total == 0.0:
            self.shift, self.total = shift, total
        elif shift > self.shift:
            self.total = self.total * math.exp(self.shift - shift) + total
            self.shift = shift
        else:
            self.total += total * math.exp(shift - self.shift)
        return self

    @property
    def value(self) -> float:
        if self.total == 0.0:
            raise ValueError("empty log-sum")
        return self.shift + math.log(self.total)


@dataclass(frozen=True)
class GoldenInt:
    """Exact element ``a + b*gamma`` of the ring Z[gamma], gamma**2 = gamma + 1.

    Used to compare integers against powers of gamma and rho = 1 - gamma**-6
    without any rounding.
    """

    a: int
    b: int = 0

    @classmethod
    def power(cls, n: int) -> "GoldenInt":
        return cls(*_golden_power(n))

    def __add__(self, other: "GoldenInt | int") -> "GoldenInt":
        o = _as_golden(other)
        return GoldenInt(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self) -> "GoldenInt":
        return GoldenInt(-self.a, -self.b)

    def __sub__(self, other: "GoldenInt | int") -> "GoldenInt":
        return self + (-_as_golden(other))

    def __rsub__(self, other: "GoldenInt | int") -> "GoldenInt":
        return _as_golden(other) - self

    def __mul__(self, other: "GoldenInt | int") -> "GoldenInt":
        o = _as_golden(other)
        # (a + b g)(c + d g) = ac + bd + (ad + bc + bd) g
        bd = self.b * o.b
        return GoldenInt(self.a * o.a + bd, self.a * o.b + self.b * o.a + bd)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "GoldenInt":
        if n < 0:
            raise ValueError("negative powers are not closed in Z[gamma] in general")
        result, base = GoldenInt(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def sign(self) -> int:
        """Exact sign of ``a + b*gamma``."""
        # a + b*gamma = ((2a + b) + b*sqrt(5)) / 2
        u, v = 2 * self.a + self.b, self.b
        if u >= 0 and v >= 0:
            return 0 if (u == 0 and v == 0) else 1
        if u <= 0 and v <= 0:
            return -1
        # opposite signs: compare u**2 with 5 v**2
        if u > 0:
            return 1 if u * u > 5 * v * v else -1
        return 1 if 5 * v * v > u * u else -1

    def __float__(self) -> float:
        return self.a + self.b * GAMMA


def _as_golden(x: "GoldenInt | int") -> GoldenInt:
    return x if isinstance(x, GoldenInt) else GoldenInt(int(x))


@lru_cache(maxsize=None)
def _golden_power(n: int) -> tuple[int, int]:
    # gamma**n = f_{n-1} + f_n gamma; gamma**-m = (-1)**m (f_{m+1} - f_m gamma)
    if n >= 0:
        return (fib(n - 1) if n >= 1 else 1, fib(n))
    m = -n
    sign = -1 if m % 2 else 1
    return (sign * fib(m + 1), -sign * fib(m))
