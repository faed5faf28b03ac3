"""Finite-depth approximants of the growth rates l1..l6 and Monte-Carlo probes.

For a point x with continued fraction digits a_1, a_2, ... and convergents
p_k/q_k, with digit sum tau_k = a_1 + ... + a_k:

    l1 ~ 2 log q_k / tau_k        l2 ~ tau_k / k          l3 ~ 2 log q_k / k
    l4 ~ -log|T_n(x)| / n  (n = tau_k)
    l5 ~ -2 log|x - p_k/q_k| / tau_k
    l6 ~ -2 log|x - p_k/q_k| / k

All inputs to the logarithms are exact integers or rationals.  No limit is
ever asserted; every number carries its truncation parameters.
"""
from __future__ import annotations

import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cont_frac import CFWord, DomainError, cf_expand, cf_expand_interval, cf_expand_real, convergents
from .core import log_fraction

__all__ = [
    "RateReport",
    "MonteCarloResult",
    "InsufficientDigits",
    "parse_point",
    "rate_report",
    "interval_lengths_along",
    "cocycle_proxy_gap",
    "monte_carlo_levy",
    "monte_carlo_ell6",
    "khintchin_divergence_probe",
    "sample_digits",
]


class InsufficientDigits(ValueError):
    """Not enough certified digits for the requested depth."""


@dataclass
class RateReport:
    input: str
    k: int
    n: int
    ell: dict
    proxies: dict
    truncated: bool
    terminal: bool

    @property
    def depth(self) -> int:
        return self.k

    def to_dict(self) -> dict:
        return {
            "input": self.input,
            "depth": self.k,
            "n": self.n,
            "ell": {key: ("terminal" if v is None else v) for key, v in self.ell.items()},
            "proxies": self.proxies,
            "truncated": self.truncated,
            "terminal": self.terminal,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


@dataclass
class MonteCarloResult:
    samples: int
    depth: int
    mean: float
    stderr: float
    seed: int
    statistic: str = "2logq/k"
    values: np.ndarray | None = field(default=None, repr=False, compare=False)

    CSV_COLUMNS = ("seed", "samples", "depth", "mean", "stderr")

    def csv_row(self) -> list:
        return [self.seed, self.samples, self.depth, format(self.mean, ".17g"), format(self.stderr, ".17g")]

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("values")
        return d


# ------------------------------------------------------------------ inputs


def parse_point(x) -> tuple[CFWord, Fraction, str]:
    """Normalise a CF word, rational or decimal string to ``(digits, x, label)``.

    For a word flagged truncated (a certified prefix of an unknown real), ``x``
    is the value of that prefix; differences ``x - p_k/q_k`` are then exact
    for the prefix and agree with the real point to leading order for
    ``k`` at least two below the prefix length.
    """
    if isinstance(x, CFWord):
        return x, x.value, json.dumps(list(x.digits))
    if isinstance(x, Fraction):
        return cf_expand(x), x, str(x)
    if isinstance(x, (list, tuple)):
        w = CFWord(tuple(x))
        return w, w.value, json.dumps(list(w.digits))
    text = str(x).strip()
    if text.startswith("["):
        try:
            digits = tuple(int(d) for d in text.strip("[]").split(",") if d.strip())
        except ValueError:
            raise DomainError(f"CF word must list positive integers, got {text!r}") from None
        w = CFWord(digits)
        return w, w.value, json.dumps(list(w.digits))
    if "/" in text:
        frac = Fraction(text)
        return cf_expand(frac), frac, text
    word = cf_expand_real(text)
    return word, Fraction(text), text


# ------------------------------------------------------------------ reports


def interval_lengths_along(x: Fraction, orders: Sequence[int]) -> dict[int, Fraction]:
    """Exact ``|T_n(x)|`` for each requested order by a single mediant descent."""
    x = Fraction(x)
    if not 0 <= x < 1:
        raise DomainError(f"need 0 <= x < 1, got {x}")
    wanted = sorted(set(orders))
    out: dict[int, Fraction] = {}
    xs, xt = x.numerator, x.denominator
    ls, lt, rs, rt = 0, 1, 1, 1
    pos = 0
    for n in range(wanted[-1] + 1):
        if pos < len(wanted) and wanted[pos] == n:
            out[n] = Fraction(1, lt * rt)
            pos += 1
        ms, mt = ls + rs, lt + rt
        if xs * mt < ms * xt:
            rs, rt = ms, mt
        else:
            ls, lt = ms, mt
    return out


def rate_report(x, depth: int | None = None) -> RateReport:
    """Approximants of l1..l6 at CF depth ``k = depth`` with matched ``n = tau_k``.

    When ``x`` equals its k-th convergent (a rational at its terminal depth)
    l5 and l6 are undefined and reported as ``None`` with ``terminal`` set.
    Without ``depth`` the full word is used, or all but the last two digits
    when the word is a truncated prefix.
    """
    word, value, label = parse_point(x)
    m = len(word)
    if depth is None:
        # a truncated prefix ends on an uncertified digit; stay two below it
        k = max(1, m - 2) if word.truncated else m
    else:
        k = depth
    if k < 1:
        raise ValueError("depth must be >= 1")
    if k > m:
        raise InsufficientDigits(f"only {m} certified digits, depth {k} requested")
    table = convergents(word.digits[:k])
    p_k, q_k = table.p[k], table.q[k]
    tau_k = sum(word.digits[:k])
    two_log_q = 2.0 * math.log(q_k)
    minus_log_t = -log_fraction(interval_lengths_along(value, [tau_k])[tau_k])
    diff = abs(value - Fraction(p_k, q_k))
    terminal = diff == 0
    ell = {
        "l1": two_log_q / tau_k,
        "l2": tau_k / k,
        "l3": two_log_q / k,
        "l4": minus_log_t / tau_k,
        "l5": None if terminal else -2.0 * log_fraction(diff) / tau_k,
        "l6": None if terminal else -2.0 * log_fraction(diff) / k,
    }
    proxies = {"minus_log_Tn": minus_log_t, "two_log_qk": two_log_q, "tau_k": tau_k}
    return RateReport(label, k, tau_k, ell, proxies, word.truncated, terminal)


def cocycle_proxy_gap(x, k_max: int | None = None) -> dict:
    """``|2 log q_k + log|T_{tau_k + 1}(x)||`` for k = 1..k_max and its maximum.

    ``tau_k`` are the block boundaries of the Farey coding of x; boundedness
    of the gap in k is the comparability between the two proxies.
    """
    word, value, _ = parse_point(x)
    k_max = len(word) if k_max is None else min(k_max, len(word))
    table = convergents(word.digits[:k_max])
    taus = np.cumsum(word.digits[:k_max]).tolist()
    lengths = interval_lengths_along(value, [t + 1 for t in taus])
    gaps = [abs(2.0 * math.log(table.q[k]) + log_fraction(lengths[taus[k - 1] + 1])) for k in range(1, k_max + 1)]
    return {"gaps": gaps, "max": max(gaps), "k_max": k_max}


# -------------------------------------------------------------- Monte Carlo

_BITS_PER_DIGIT = 3.5  # ~ chi / log 2 bits per digit for q_k**2, plus slack
_EXTRA_BITS = 64


def sample_digits(rng: np.random.Generator, k: int) -> tuple[tuple[int, ...], Fraction]:
    """First ``k + 1`` certified CF digits of a uniform point, and the point's lower end.

    Random bits are drawn until every real in the dyadic interval
    ``[m/2**D, (m+1)/2**D]`` shares the digits, so the digits are exactly
    those of a uniformly distributed real.
    """
    want = k + 1
    bits = int(_BITS_PER_DIGIT * want) + _EXTRA_BITS
    m = int.from_bytes(rng.bytes((bits + 7) // 8), "big")
    bits = 8 * ((bits + 7) // 8)
    while True:
        den = 1 << bits
        if m > 0:
            word = cf_expand_interval(Fraction(m, den), Fraction(m + 1, den), want)
            if len(word) >= want:
                return word.digits, Fraction(m, den)
        extra = max(64, bits // 4)
        extra = 8 * ((extra + 7) // 8)
        m = (m << extra) | int.from_bytes(rng.bytes(extra // 8), "big")
        bits += extra


def _levy_chunk(args) -> list[tuple[float, float, float]]:
    entropy, indices, k = args
    out = []
    for i in indices:
        rng = np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=(i,)))
        digits, x = sample_digits(rng, k)
        table = convergents(digits[:k])
        q, p = table.q[k], table.p[k]
        out.append(
            (
                2.0 * math.log(q) / k,
                -2.0 * log_fraction(abs(x - Fraction(p, q))) / k,
                sum(digits[:k]) / k,
            )
        )
    return out


def _run_samples(samples: int, k: int, seed: int, workers: int) -> np.ndarray:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if k < 1:
        raise ValueError("depth must be >= 1")
    # per-sample substreams: sample i always uses spawn key (i,) under the master seed
    entropy = int(seed)
    if workers <= 1:
        rows = _levy_chunk((entropy, range(samples), k))
    else:
        chunks = np.array_split(np.arange(samples), workers * 4)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_levy_chunk, [(entropy, c.tolist(), k) for c in chunks if len(c)])
            rows = [r for part in parts for r in part]
    return np.array(rows)


def _summarise(values: np.ndarray, samples: int, k: int, seed: int, name: str) -> MonteCarloResult:
    mean = math.fsum(values) / len(values)
    stderr = statistics.stdev(values.tolist()) / math.sqrt(len(values)) if len(values) > 1 else math.nan
    return MonteCarloResult(samples, k, mean, stderr, seed, name, values)


def monte_carlo_levy(samples: int, k_depth: int, seed: int, workers: int = 1) -> MonteCarloResult:
    """Mean and standard error of ``2 log q_k / k`` over uniform random points."""
    rows = _run_samples(samples, k_depth, seed, workers)
    return _summarise(rows[:, 0], samples, k_depth, seed, "2logq/k")


def monte_carlo_ell6(samples: int, k_depth: int, seed: int, workers: int = 1) -> MonteCarloResult:
    """Mean and standard error of ``-2 log|x - p_k/q_k| / k`` over uniform random points."""
    rows = _run_samples(samples, k_depth, seed, workers)
    return _summarise(rows[:, 1], samples, k_depth, seed, "-2log|x-p/q|/k")


def khintchin_divergence_probe(samples: int, k_values: Sequence[int], seed: int) -> list[dict]:
    """Empirical quantiles of ``tau_k / k`` and the largest digit seen, per k.

    Documents the growth trend only; divergence is not finitely checkable.
    """
    out = []
    for k in k_values:
        rows = []
        entropy = int(seed)
        for i in range(samples):
            rng = np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=(i,)))
            digits, _ = sample_digits(rng, k)
            rows.append((sum(digits[:k]) / k, max(digits[:k])))
        ratios = np.array([r[0] for r in rows])
        out.append(
            {
                "k": k,
                "samples": samples,
                "median": float(np.median(ratios)),
                "q90": float(np.quantile(ratios, 0.9)),
                "q99": float(np.quantile(ratios, 0.99)),
                "max_digit": int(max(r[1] for r in rows)),
            }
        )
    return out
