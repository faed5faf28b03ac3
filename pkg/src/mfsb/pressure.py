"""Stern-Brocot pressure P and Diophantine pressure P_D.

Evaluation routes, by ``method`` name:

* ``direct-level``  -- (1/n) log sum over order-n intervals of |T|**theta, exact lengths;
* ``denominators``  -- the same growth rate written with convergent denominators;
* ``induced-root``  -- the zero in q of the induced operator pressure (spectral);
* ``operator-eig``  -- P_D as the log Perron eigenvalue of the Diophantine operator;
* ``word-sum``      -- P_D from truncated sums over digit words (cross-check only);
* ``synthetic``     -- caller-supplied samples.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Callable, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.optimize import brentq

from .core import LOG2, TWO_LOG_GAMMA, LogSumExp, fmt_float
from .stern_brocot import DEFAULT_DEPTH_CAP, _check_depth, iter_level_chunks
from .transfer import (
    DEFAULT_DEGREE,
    DEFAULT_DIGIT_CAP,
    NumericalFailure,
    SingularDomainError,
    build_operator,
    leading_eigenvalue,
)

__all__ = [
    "PressureCurve",
    "BracketError",
    "SingularDomainError",
    "METHODS",
    "direct_pressure_estimate",
    "direct_log_partition",
    "akn_denominators",
    "pressure_via_denominators",
    "induced_pressure",
    "beta",
    "stern_brocot_pressure",
    "diophantine_pressure",
    "diophantine_pressure_wordsum",
    "diophantine_pressure_wordratio",
    "pressure_curve",
    "is_convex_nonincreasing",
    "PD_DOMAIN_CUT",
    "NumericalFailure",
    "CSV_COLUMNS",
]

METHODS = ("direct-level", "denominators", "induced-root", "operator-eig", "word-sum", "synthetic")
CSV_COLUMNS = ("theta", "value", "method", "n_or_degree", "error_bound")
PD_DOMAIN_CUT = 0.55
ROOT_XTOL = 1e-15


class BracketError(RuntimeError):
    """The root bracket for beta does not change sign."""


# ---------------------------------------------------------------- direct sums


def _chunk_partial(theta: float, num: np.ndarray, den: np.ndarray) -> LogSumExp:
    logt = np.log(den.astype(float))
    return LogSumExp().add(-theta * (logt[:-1] + logt[1:]))


def direct_log_partition(theta: float, n: int, cap: int | None = None, threads: int = 1) -> float:
    """``log sum_{T in order n} |T|**theta`` with |T| = 1/(t t') from exact denominators.

    The level is streamed in fixed chunks; partial log-sums are merged in chunk
    order, so the result does not depend on ``threads``.
    """
    _check_depth(n, cap)
    chunks = iter_level_chunks(n, cap=cap)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _chunk_partial(theta, c[1], c[2]), chunks))
    else:
        parts = [_chunk_partial(theta, num, den) for _, num, den in chunks]
    acc = LogSumExp()
    for part in parts:
        acc.merge(part)
    return acc.value


def direct_pressure_estimate(theta: float, n: int, cap: int | None = None, threads: int = 1) -> float:
    """``(1/n) log sum_{T in order n} |T|**theta``."""
    if n < 1:
        raise ValueError(f"level must be >= 1, got {n}")
    if theta == 1:
        # lengths of a partition of [0, 1) sum to one
        _check_depth(n, cap)
        return 0.0
    return direct_log_partition(theta, n, cap=cap, threads=threads) / n


def akn_denominators(n: int, with_lengths: bool = False):
    """Denominators ``q_k`` of all words in the union over k of ``A_k^n``.

    Walks the ``2**(n-2)`` compositions of ``n`` with last part >= 2 through
    the matrix product ``R**a1 J R**a2 J ... R**ak J`` (R = [[1,1],[0,1]],
    J = [[0,1],[1,0]]), tracking only the first row.  With ``with_lengths``
    the word lengths ``k`` are returned as a second array.
    """
    if n < 2:
        raise ValueError(f"A_k^n needs n >= 2, got {n}")
    if n > DEFAULT_DEPTH_CAP + 2:
        raise ValueError(f"n = {n} too large for exhaustive enumeration")
    # first row after the first unit step R
    u = np.array([1], dtype=np.int64)
    v = np.array([1], dtype=np.int64)
    k = np.array([1], dtype=np.int16)
    for _ in range(n - 2):
        # next unit either extends the current digit (R) or opens a new one (J R)
        s = u + v
        u, v = np.concatenate([u, v]), np.concatenate([s, s])
        k = np.concatenate([k, k + 1])
    # the last unit must extend the current digit (last digit >= 2); q = u + v
    q = u + v
    return (q, k) if with_lengths else q


def pressure_via_denominators(theta: float, n: int) -> float:
    """``(1/n) log sum_k sum_{A_k^n} q_k**(-2 theta)``."""
    q = akn_denominators(n)
    return LogSumExp().add(-2.0 * theta * np.log(q.astype(float))).value / n


# ------------------------------------------------------------- spectral routes


def induced_pressure(
    theta: float,
    q: float,
    degree: int = DEFAULT_DEGREE,
    digit_cap: int = DEFAULT_DIGIT_CAP,
) -> float:
    """Log Perron eigenvalue of ``f -> sum_n exp(-q n) (n+x)**(-2 theta) f(1/(n+x))``.

    Defined for ``q > 0`` and any ``theta``; ``q = 0`` is accepted for
    ``theta > 1/2`` where it coincides with the Diophantine pressure.
    """
    op = build_operator(theta, q, degree=degree, digit_cap=digit_cap)
    lam, _ = leading_eigenvalue(op.matrix)
    return math.log(lam)


def _beta_bracket(theta: float) -> tuple[float, float]:
    if theta <= 0:
        lo = -theta * TWO_LOG_GAMMA
        return max(lo - 1e-9, 1e-12), LOG2 + lo + 1e-9
    # for theta > 1/2 the q = 0 end is the Diophantine pressure, positive below 1
    return (0.0 if theta > 0.5 else 1e-12), LOG2 + 1e-9


def beta(
    theta: float,
    degree: int = DEFAULT_DEGREE,
    digit_cap: int = DEFAULT_DIGIT_CAP,
    xtol: float = ROOT_XTOL,
) -> float:
    """The unique ``q`` with ``induced_pressure(theta, q) = 0`` (theta < 1)."""
    theta = float(theta)
    if theta >= 1:
        raise ValueError(f"beta needs theta < 1, got {theta}")
    lo, hi = _beta_bracket(theta)
    f = lambda q: induced_pressure(theta, q, degree, digit_cap)  # noqa: E731
    f_lo, f_hi = f(lo), f(hi)
    if f_lo < 0 or f_hi > 0:
        raise BracketError(f"no sign change for beta({theta}) on [{lo}, {hi}]: {f_lo}, {f_hi}")
    if f_lo == 0:
        return lo
    return brentq(f, lo, hi, xtol=xtol)


def stern_brocot_pressure(theta: float, **kw) -> float:
    """P(theta): beta(theta) below 1, zero on [1, inf)."""
    return 0.0 if theta >= 1 else beta(theta, **kw)


def diophantine_pressure(
    theta: float,
    degree: int = DEFAULT_DEGREE,
    digit_cap: int = DEFAULT_DIGIT_CAP,
    margin: float = PD_DOMAIN_CUT - 0.5,
) -> float:
    """P_D(theta) as the log Perron eigenvalue of the Diophantine operator."""
    if theta <= 0.5 + margin:
        raise SingularDomainError(f"P_D is evaluated only for theta > {0.5 + margin}, got {theta}")
    return induced_pressure(theta, 0.0, degree, digit_cap)


def _all_words_sum(s: float, k: int, top: int) -> float:
    # exhaustive sum over words with every digit <= top
    digits = np.arange(1, top + 1, dtype=float)
    q_prev, q_cur = np.zeros(1), np.ones(1)
    for _ in range(k):
        q_prev, q_cur = np.repeat(q_cur, top), (np.outer(q_cur, digits) + q_prev[:, None]).ravel()
    return float(np.sum(q_cur**-s))


def _completion_bounds(s: float, k: int, digits: np.ndarray) -> np.ndarray:
    """``B[r, b]`` bounds ``sum (q_{j+r}/q_j)**-s`` over r further digits after last digit b.

    Uses ``q_{i+1}/q_i = a_{i+1} + q_{i-1}/q_i`` with ``q_{i-1}/q_i >= 1/(a_i + 1)``.
    """
    w = (digits[None, :] + 1.0 / (digits[:, None] + 1.0)) ** -s
    bounds = np.ones((k + 1, len(digits)))
    for r in range(1, k + 1):
        bounds[r] = w @ bounds[r - 1]
    return bounds


def diophantine_pressure_wordsum(
    theta: float, k: int, digit_cap: int, rtol: float = 1e-5
) -> tuple[float, float]:
    """Truncated ``(1/k) log sum_{a_i <= digit_cap} q_k([a_1..a_k])**(-2 theta)``.

    Depth-first over digit words, with the last two digits summed as a dense
    block.  A prefix is dropped when a rigorous bound on everything below it
    falls under ``rtol`` times a lower bound of the full sum.  The returned
    value only counts kept words, so it never exceeds the truncated sum; the
    second element bounds the resulting error of the estimate.
    """
    if theta <= 0.5:
        raise SingularDomainError(f"word sums need theta > 1/2, got {theta}")
    if k < 1 or digit_cap < 1:
        raise ValueError("k and digit_cap must be positive")
    s = 2.0 * theta
    digits = np.arange(1, digit_cap + 1, dtype=float)
    if k == 1:
        return math.log(float(np.sum(digits**-s))), 0.0

    top = min(digit_cap, max(1, int(2e5 ** (1.0 / k))))
    cut = rtol * _all_words_sum(s, k, top)
    bounds = _completion_bounds(s, k, digits)
    total = 0.0
    dropped = 0.0

    # stack of (q_prev, q_cur, depth)
    stack = [(0.0, 1.0, 0)]
    while stack:
        q_prev, q_cur, depth = stack.pop()
        q_next = digits * q_cur + q_prev
        if depth + 2 == k:
            last = np.outer(q_next, digits) + q_cur
            total += float(np.sum(last**-s))
            continue
        node_bound = q_next**-s * bounds[k - depth - 1]
        keep = node_bound >= cut
        dropped += float(np.sum(node_bound[~keep]))
        for qn in q_next[keep][::-1]:
            stack.append((q_cur, float(qn), depth + 1))
    return math.log(total) / k, math.log1p(dropped / total) / k


def diophantine_pressure_wordratio(theta: float, k: int, digit_cap: int, rtol: float = 1e-5) -> float:
    """``log S_k - log S_{k-1}`` for the truncated word sums ``S_k``.

    The plain estimate ``(1/k) log S_k`` carries a ``log(c)/k`` offset from
    the eigenprojection constant; successive ratios cancel it.
    """
    if k < 2:
        raise ValueError("the ratio estimate needs k >= 2")
    hi, _ = diophantine_pressure_wordsum(theta, k, digit_cap, rtol)
    lo, _ = diophantine_pressure_wordsum(theta, k - 1, digit_cap, rtol)
    return k * hi - (k - 1) * lo


# ------------------------------------------------------------------- curves


@dataclass
class PressureCurve:
    """Sampled pressure values with provenance.

    ``func``, when present, evaluates the same pressure at arbitrary theta and
    is used by the Legendre machinery to refine between grid nodes.  Without
    it, values between nodes come from a cubic interpolant (Hermite when
    ``derivatives`` are known).  ``slope_bounds`` records the closure of the
    derivative range when it is known analytically.
    """

    theta_grid: np.ndarray
    values: np.ndarray
    method: str
    params: dict = field(default_factory=dict)
    error_bounds: np.ndarray | None = None
    func: Callable[[float], float] | None = field(default=None, repr=False, compare=False)
    derivatives: np.ndarray | None = field(default=None, repr=False)
    slope_bounds: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        self.theta_grid = np.asarray(self.theta_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.theta_grid.shape != self.values.shape:
            raise ValueError("theta grid and values differ in shape")
        if np.any(np.diff(self.theta_grid) <= 0):
            raise ValueError("theta grid must be strictly increasing")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.error_bounds is None:
            self.error_bounds = np.zeros_like(self.values)
        if self.derivatives is not None:
            self.derivatives = np.asarray(self.derivatives, dtype=float)
        self._interp = None

    def __len__(self) -> int:
        return len(self.values)

    def __call__(self, theta: float) -> float:
        if self.func is not None:
            return float(self.func(theta))
        return float(self.interpolant(theta))

    @property
    def interpolant(self):
        if self._interp is None:
            if len(self) < 2:
                raise ValueError("interpolation needs at least two nodes")
            if self.derivatives is not None:
                self._interp = CubicHermiteSpline(self.theta_grid, self.values, self.derivatives)
            elif len(self) >= 4:
                self._interp = CubicSpline(self.theta_grid, self.values)
            else:
                self._interp = lambda t: np.interp(t, self.theta_grid, self.values)
        return self._interp

    def detached(self) -> "PressureCurve":
        """Copy without ``func``, evaluated between nodes by interpolation only."""
        return PressureCurve(
            self.theta_grid, self.values, self.method, dict(self.params),
            self.error_bounds, None, self.derivatives, self.slope_bounds,
        )

    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.theta_grid)

    def slope_range(self) -> tuple[float, float]:
        if self.slope_bounds is not None:
            return self.slope_bounds
        if self.derivatives is not None:
            return float(self.derivatives[0]), float(self.derivatives[-1])
        s = self.slopes()
        return float(s[0]), float(s[-1])

    # CSV: theta,value,method,n_or_degree,error_bound
    def to_csv(self, fh: IO[str]) -> None:
        size = self.params.get("n", self.params.get("degree", self.params.get("k", "")))
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for t, v, e in zip(self.theta_grid, self.values, self.error_bounds):
            writer.writerow([fmt_float(t), fmt_float(v), self.method, size, fmt_float(e)])

    @classmethod
    def from_csv(cls, fh: IO[str]) -> "PressureCurve":
        rows = list(csv.DictReader(fh))
        if not rows:
            raise ValueError("empty pressure CSV")
        methods = {r["method"] for r in rows}
        if len(methods) != 1:
            raise ValueError(f"mixed methods in one curve: {sorted(methods)}")
        method = methods.pop()
        size = rows[0]["n_or_degree"]
        key = {"direct-level": "n", "denominators": "n", "word-sum": "k"}.get(method, "degree")
        params = {key: int(size)} if size else {}
        return cls(
            [float(r["theta"]) for r in rows],
            [float(r["value"]) for r in rows],
            method,
            params,
            np.array([float(r["error_bound"]) for r in rows]),
        )


def pressure_curve(
    method: str,
    thetas: Sequence[float],
    level: int = 18,
    degree: int = DEFAULT_DEGREE,
    digit_cap: int = DEFAULT_DIGIT_CAP,
    k: int = 6,
    threads: int = 1,
    rtol: float = 1e-5,
) -> PressureCurve:
    """Evaluate one method on a theta grid."""
    thetas = np.asarray(sorted(float(t) for t in thetas))
    errors = np.zeros_like(thetas)
    if method == "direct-level":
        params = {"n": level}
        func = lambda t: direct_pressure_estimate(t, level, threads=threads)  # noqa: E731
    elif method == "denominators":
        params = {"n": level}
        func = lambda t: pressure_via_denominators(t, level)  # noqa: E731
    elif method == "induced-root":
        params = {"degree": degree, "digit_cap": digit_cap}
        func = lambda t: stern_brocot_pressure(t, degree=degree, digit_cap=digit_cap)  # noqa: E731
    elif method == "operator-eig":
        params = {"degree": degree, "digit_cap": digit_cap}
        func = lambda t: diophantine_pressure(t, degree=degree, digit_cap=digit_cap)  # noqa: E731
    elif method == "word-sum":
        params = {"k": k, "digit_cap": digit_cap, "rtol": rtol}
        out = [diophantine_pressure_wordsum(t, k, digit_cap, rtol) for t in thetas]
        values = np.array([v for v, _ in out])
        errors = np.array([e for _, e in out])
        return PressureCurve(thetas, values, method, params, errors)
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if threads > 1 and method != "direct-level":
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = np.array(list(pool.map(func, thetas)))
    else:
        values = np.array([func(t) for t in thetas])
    return PressureCurve(thetas, values, method, params, errors, func=func)


def is_convex_nonincreasing(curve: PressureCurve, slack: float = 1e-9) -> bool:
    """Slopes non-positive and non-decreasing on the grid, up to ``slack``."""
    slopes = curve.slopes()
    if len(slopes) == 0:
        return True
    return bool(np.all(slopes <= slack) and np.all(np.diff(slopes) >= -slack))
