"""Continued fractions, convergents, the Gauss and Farey maps and run-length codings.

Digit words follow the convention ``x = [a1, a2, ...] = 1/(a1 + 1/(a2 + ...))``
for ``x`` in (0, 1).  A finite word is *canonical* when its last digit is at
least 2 (single-digit words ``[a]`` need ``a >= 2`` to land in (0, 1)).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Sequence

__all__ = [
    "CFWord",
    "ConvergentTable",
    "RunLengthWord",
    "DomainError",
    "ContractViolation",
    "cf_expand",
    "cf_expand_real",
    "cf_expand_interval",
    "cf_value",
    "convergents",
    "continuant",
    "enumerate_Akn",
    "count_Akn",
    "gauss_map",
    "farey_map",
    "farey_branch",
    "farey_branches",
    "runlength_to_cf",
    "cf_to_runlength",
    "mirror",
    "flatten",
]


class DomainError(ValueError):
    """Input outside the domain of a map or expansion."""


class ContractViolation(ValueError):
    """Input violates a documented precondition (e.g. a non-canonical word)."""


@dataclass(frozen=True)
class CFWord:
    """Finite continued-fraction digit word ``[a1, ..., ak]``.

    ``truncated`` marks a word certified from a real number whose expansion
    continues past the last digit; such words need not be canonical.
    """

    digits: tuple[int, ...]
    truncated: bool = False
    digit_sum: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        digits = tuple(int(a) for a in self.digits)
        if any(a < 1 for a in digits):
            raise DomainError(f"continued-fraction digits must be >= 1, got {digits}")
        object.__setattr__(self, "digits", digits)
        object.__setattr__(self, "digit_sum", sum(digits))

    @classmethod
    def of(cls, *digits: int) -> "CFWord":
        return cls(tuple(digits))

    @property
    def canonical(self) -> bool:
        return len(self.digits) >= 1 and self.digits[-1] >= 2

    def __len__(self) -> int:
        return len(self.digits)

    def __iter__(self) -> Iterator[int]:
        return iter(self.digits)

    def __getitem__(self, i):
        return self.digits[i]

    @property
    def value(self) -> Fraction:
        return cf_value(self.digits)

    def prefix(self, k: int) -> "CFWord":
        return CFWord(self.digits[:k], truncated=self.truncated or k < len(self.digits))

    def to_json(self) -> str:
        return json.dumps(list(self.digits))

    @classmethod
    def from_json(cls, text: str) -> "CFWord":
        return cls(tuple(json.loads(text)))


@dataclass(frozen=True)
class ConvergentTable:
    """Convergents ``(p_k, q_k)`` for ``k = 0..K`` with ``p_0/q_0 = 0/1``."""

    p: tuple[int, ...]
    q: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.q)

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.p, self.q))

    def fraction(self, k: int) -> Fraction:
        return Fraction(self.p[k], self.q[k])


@dataclass(frozen=True)
class RunLengthWord:
    """Run-length word ``(X^n1, Y^n2, X^n3, ...)`` with ``{X, Y} = {A, B}``."""

    lead: str
    blocks: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.lead not in ("A", "B"):
            raise DomainError(f"leading letter must be 'A' or 'B', got {self.lead!r}")
        blocks = tuple(int(b) for b in self.blocks)
        if not blocks or any(b < 1 for b in blocks):
            raise DomainError(f"blocks must be a non-empty sequence of positive integers, got {blocks}")
        object.__setattr__(self, "blocks", blocks)

    def to_dict(self) -> dict:
        return {"lead": self.lead, "blocks": list(self.blocks)}

    @classmethod
    def from_dict(cls, d: dict) -> "RunLengthWord":
        return cls(d["lead"], tuple(d["blocks"]))


def cf_value(digits: Sequence[int]) -> Fraction:
    """Exact value of ``[a1, ..., ak]``; the empty word is 0."""
    x = Fraction(0)
    for a in reversed(digits):
        x = 1 / (a + x)
    return x


def cf_expand(x: Fraction | int | str) -> CFWord:
    """Canonical finite expansion of a rational in (0, 1)."""
    x = Fraction(x)
    if not 0 < x < 1:
        raise DomainError(f"cf_expand needs 0 < x < 1, got {x}")
    digits = []
    num, den = x.numerator, x.denominator
    while num:
        a, r = divmod(den, num)
        digits.append(a)
        den, num = num, r
    # the Euclidean algorithm already ends on a digit >= 2 except for x = 1
    return CFWord(tuple(digits))


def _common_prefix(lo: Fraction, hi: Fraction, max_digits: int) -> list[int]:
    digits: list[int] = []
    a_num, a_den = lo.numerator, lo.denominator
    b_num, b_den = hi.numerator, hi.denominator
    while len(digits) < max_digits and a_num and b_num:
        da, ra = divmod(a_den, a_num)
        db, rb = divmod(b_den, b_num)
        if da != db:
            break
        digits.append(da)
        a_den, a_num = a_num, ra
        b_den, b_num = b_num, rb
    return digits


def cf_expand_interval(lo: Fraction, hi: Fraction, max_digits: int) -> CFWord:
    """Digits shared by every real in ``[lo, hi]`` (both endpoints in (0, 1)).

    The result is flagged truncated: the digits are certified but the
    expansion of an arbitrary point of the interval continues.
    """
    digits = _common_prefix(Fraction(lo), Fraction(hi), max_digits)
    return CFWord(tuple(digits), truncated=True)


def cf_expand_real(x: str | float | Decimal, max_digits: int = 10_000) -> CFWord:
    """Certified digits of a real given as a decimal string or float.

    A decimal string with ``d`` fractional digits stands for every real that
    rounds to it, i.e. the interval ``x +- 10**-d / 2``; only digits common to
    the whole interval are returned.  Floats are exact binary rationals and
    are expanded exactly.
    """
    if isinstance(x, float):
        frac = Fraction(x)
        if not 0 < frac < 1:
            raise DomainError(f"need 0 < x < 1, got {x}")
        word = cf_expand(frac)
        return CFWord(word.digits[:max_digits], truncated=len(word) > max_digits)
    text = str(x).strip()
    center = Fraction(text)
    if not 0 < center < 1:
        raise DomainError(f"need 0 < x < 1, got {text}")
    if "." in text:
        places = len(text.split(".", 1)[1].rstrip())
    else:
        places = 0
    half = Fraction(1, 2 * 10**places)
    lo, hi = max(center - half, Fraction(0)), min(center + half, Fraction(1))
    if lo <= 0 or hi >= 1:
        return CFWord((), truncated=True)
    return cf_expand_interval(lo, hi, max_digits)


def convergents(word: CFWord | Sequence[int]) -> ConvergentTable:
    """All convergents ``p_k/q_k`` of a digit word via the three-term recurrence."""
    digits = tuple(word)
    if not digits:
        raise DomainError("convergents of an empty word")
    ps, qs = [0], [1]
    p_prev, q_prev = 1, 0  # k = -1
    p_cur, q_cur = 0, 1  # k = 0
    for a in digits:
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        ps.append(p_cur)
        qs.append(q_cur)
    return ConvergentTable(tuple(ps), tuple(qs))


def continuant(digits: Sequence[int]) -> int:
    """Denominator ``q_k`` of ``[a1, ..., ak]`` (1 for the empty word)."""
    q_prev, q_cur = 0, 1
    for a in digits:
        q_prev, q_cur = q_cur, a * q_cur + q_prev
    return q_cur


def count_Akn(n: int, k: int) -> int:
    if n < 2 or not 1 <= k <= n - 1:
        return 0
    return math.comb(n - 2, k - 1)


def enumerate_Akn(n: int, k: int) -> Iterator[CFWord]:
    """k-tuples of positive integers summing to n with last entry >= 2, lexicographic."""
    if n < 2 or not 1 <= k <= n - 1:
        return
    # a_k >= 2: write a_k = 1 + b with b >= 1, i.e. compositions of n - 1 into k parts
    m = n - 1
    # compositions of m into k parts <-> (k-1)-subsets of cut points {1..m-1};
    # reversed cut order gives lexicographic order of the tuples
    cut_sets = list(combinations(range(1, m), k - 1))
    words = []
    for cuts in cut_sets:
        bounds = (0,) + cuts + (m,)
        parts = [bounds[i + 1] - bounds[i] for i in range(k)]
        parts[-1] += 1
        words.append(tuple(parts))
    words.sort()
    for w in words:
        yield CFWord(w)


def gauss_map(x):
    """``1/x mod 1``.  Accepts a :class:`CFWord`, a Fraction or a float."""
    if isinstance(x, CFWord):
        if not x.digits:
            raise DomainError("Gauss map of 0")
        return CFWord(x.digits[1:], truncated=x.truncated)
    if isinstance(x, (Fraction, int)):
        x = Fraction(x)
        if not 0 < x < 1:
            raise DomainError(f"Gauss map needs 0 < x < 1, got {x}")
        y = 1 / x
        return y - math.floor(y)
    x = float(x)
    if not 0 < x < 1:
        raise DomainError(f"Gauss map needs 0 < x < 1, got {x}")
    y = 1.0 / x
    return y - math.floor(y)


def farey_branch(x) -> int:
    """1 on [0, 1/2] (inverse branch x/(x+1)), 2 on (1/2, 1] (inverse branch 1/(x+1))."""
    if isinstance(x, CFWord):
        return 1 if (not x.digits or x.digits[0] >= 2) else 2
    return 1 if x <= Fraction(1, 2) else 2


farey_branches = farey_branch


def farey_map(x):
    """Farey map: ``x/(1-x)`` on [0, 1/2], ``(1-x)/x`` on [1/2, 1].

    On digit words: ``[a1, a2, ...] -> [a1 - 1, a2, ...]`` when ``a1 >= 2`` and
    ``[1, a2, a3, ...] -> [a2, a3, ...]``.
    """
    if isinstance(x, CFWord):
        d = x.digits
        if not d:
            return x
        if d[0] >= 2:
            return CFWord((d[0] - 1,) + d[1:], truncated=x.truncated)
        return CFWord(d[1:], truncated=x.truncated)
    if isinstance(x, (Fraction, int)):
        x = Fraction(x)
        if not 0 <= x <= 1:
            raise DomainError(f"Farey map needs 0 <= x <= 1, got {x}")
        return x / (1 - x) if x <= Fraction(1, 2) else (1 - x) / x
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"Farey map needs 0 <= x <= 1, got {x}")
    return x / (1.0 - x) if x <= 0.5 else (1.0 - x) / x


def runlength_to_cf(w: RunLengthWord) -> CFWord:
    """``A``-leading ``(n1, n2, ...) -> [n1 + 1, n2, ...]``; ``B``-leading -> ``[1, n1, n2, ...]``.

    The finite run-length word is a prefix of an infinite coding, so the
    digit word is flagged truncated when it does not end on a digit >= 2.
    """
    if w.lead == "A":
        digits = (w.blocks[0] + 1,) + w.blocks[1:]
    else:
        digits = (1,) + w.blocks
    return CFWord(digits, truncated=digits[-1] < 2)


def cf_to_runlength(word: CFWord | Sequence[int]) -> RunLengthWord:
    """Inverse of :func:`runlength_to_cf`."""
    d = tuple(word)
    if not d:
        raise DomainError("empty digit word")
    if d[0] >= 2:
        return RunLengthWord("A", (d[0] - 1,) + d[1:])
    if len(d) < 2:
        raise DomainError("[1] has no run-length coding (x = 1 is excluded)")
    return RunLengthWord("B", d[1:])


def flatten(w: RunLengthWord) -> str:
    """Spell out a run-length word over {A, B}."""
    letters = []
    cur, other = w.lead, "B" if w.lead == "A" else "A"
    for n in w.blocks:
        letters.append(cur * n)
        cur, other = other, cur
    return "".join(letters)


def mirror(w):
    """The symmetry ``x -> 1 - x``.

    Swaps the leading letter of a :class:`RunLengthWord` and maps a
    :class:`CFWord` to the canonical word of ``1 - value``.
    """
    if isinstance(w, RunLengthWord):
        return RunLengthWord("B" if w.lead == "A" else "A", w.blocks)
    if isinstance(w, CFWord):
        return cf_expand(1 - w.value)
    if isinstance(w, str):
        return w.translate(str.maketrans("AB", "BA"))
    raise TypeError(f"cannot mirror {type(w).__name__}")
