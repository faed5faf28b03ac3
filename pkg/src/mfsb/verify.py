"""Registry of desk-checkable claims, each run at a configurable budget.

Every check returns ``(passed, measured, bound)``; the runner adds timing and
collects rows into a :class:`VerifyReport`.  Claim ids are stable strings.
Budgets: ``"quick"`` for smoke runs and ``"full"`` for the documented sizes.
"""
from __future__ import annotations

import csv
import json
import math
import random
import re
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Callable

import numpy as np

from . import cont_frac as cf
from . import stern_brocot as sb
from .core import CHI, GAMMA, TWO_LOG_GAMMA, GoldenInt, fib
from .pressure import (
    akn_denominators,
    beta,
    diophantine_pressure,
    direct_pressure_estimate,
)

__all__ = ["Claim", "ClaimResult", "VerifyReport", "CLAIMS", "run_claims", "UnknownClaim", "exact_length_sum"]


class UnknownClaim(KeyError):
    pass


@dataclass(frozen=True)
class Claim:
    id: str
    anchor: str
    check: Callable[[str], tuple[bool, object, object]]


@dataclass
class ClaimResult:
    id: str
    anchor: str
    status: str
    measured: object
    bound: object
    runtime: float

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "anchor": self.anchor,
            "status": self.status,
            "measured": _plain(self.measured),
            "bound": _plain(self.bound),
            "runtime": round(self.runtime, 3),
        }


def _plain(v):
    if isinstance(v, (float, int, str, bool)) or v is None:
        return v
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return str(v)


@dataclass
class VerifyReport:
    results: list[ClaimResult] = field(default_factory=list)

    @property
    def failed(self) -> list[ClaimResult]:
        return [r for r in self.results if r.status == "fail"]

    @property
    def ok(self) -> bool:
        return not self.failed

    def to_json(self) -> str:
        return json.dumps([r.to_dict() for r in self.results], indent=1)

    def to_csv(self, fh: IO[str]) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "anchor", "status", "measured", "bound", "runtime"])
        for r in self.results:
            d = r.to_dict()
            writer.writerow([d["id"], d["anchor"], d["status"], d["measured"], d["bound"], d["runtime"]])


# ----------------------------------------------------------- exact helpers


def exact_length_sum(n: int) -> Fraction:
    """Exact sum of ``1/(t_k t_{k+1})`` over the order-``n`` intervals (pairwise Fraction sum)."""
    den = sb.level(n).denominators
    terms = [Fraction(1, int(a) * int(b)) for a, b in zip(den[:-1], den[1:])]
    while len(terms) > 1:
        nxt = [terms[i] + terms[i + 1] for i in range(0, len(terms) - 1, 2)]
        if len(terms) % 2:
            nxt.append(terms[-1])
        terms = nxt
    return terms[0]


def _partition_ok(n: int) -> bool:
    lv = sb.level(n)
    s, t = lv.numerators.astype(object), lv.denominators.astype(object)
    if len(t) != 2**n + 1 or s[0] != 0 or s[-1] != 1 or t[0] != 1 or t[-1] != 1:
        return False
    # unimodular neighbours, hence strictly increasing, disjoint and adjacent
    if not np.all(s[1:] * t[:-1] - s[:-1] * t[1:] == 1):
        return False
    prods = t[:-1] * t[1:]
    if max(prods) != fib(n + 1) * fib(n + 2) or min(prods) != n + 1:
        return False
    return exact_length_sum(n) == 1


def _new_vertices(n: int) -> list[Fraction]:
    """``T_n minus T_{n-1}``: the odd positions of level ``n``."""
    lv = sb.level(n)
    return [Fraction(int(a), int(b)) for a, b in zip(lv.numerators[1::2], lv.denominators[1::2])]


def bijection_ok(n: int) -> bool:
    values = Counter()
    for k in range(1, n):
        words = list(cf.enumerate_Akn(n, k))
        if len(words) != math.comb(n - 2, k - 1):
            return False
        values.update(w.value for w in words)
    return sum(values.values()) == 2 ** (n - 2) and values == Counter(_new_vertices(n - 1))


def siblings_ok(n: int) -> bool:
    nxt = sb.level(n + 1)
    fr = [Fraction(int(a), int(b)) for a, b in zip(nxt.numerators, nxt.denominators)]
    # a new vertex of order n sits at even position 2j of order n + 1, flanked by new vertices
    for pos in range(2, len(fr) - 1, 4):
        v = fr[pos]
        left, right = fr[pos - 1], fr[pos + 1]
        a, b = sb.siblings(cf.cf_expand(v))
        if {a.value, b.value} != {left, right}:
            return False
    return True


def qbound_holds(q: int, tau: int, k: int) -> bool:
    """Exact ``q <= gamma**tau * rho**(tau - k - 1)`` with ``rho = 1 - gamma**-6``."""
    e = tau - k - 1
    g6m1 = GoldenInt.power(6) - 1
    if e >= 0:
        lhs = GoldenInt.power(6 * e) * q
        rhs = GoldenInt.power(tau) * g6m1**e
    else:
        # rho**(-m) = gamma**(6m) / (gamma**6 - 1)**m
        m = -e
        lhs = g6m1**m * q
        rhs = GoldenInt.power(tau + 6 * m)
    return (rhs - lhs).sign() >= 0


def qbound_exhaustive(max_tau: int) -> bool:
    # single digit words [n] and, for each digit sum, the largest q per length
    for n in range(1, max_tau + 1):
        if not qbound_holds(n, n, 1):
            return False
    for n in range(2, max_tau + 1):
        q, k = akn_denominators(n, with_lengths=True)
        for length in np.unique(k):
            qmax = int(q[k == length].max())
            if not qbound_holds(qmax, n, int(length)):
                return False
    return True


def random_word(rng: random.Random, max_sum: int, max_len: int | None = None) -> tuple[int, ...]:
    """Random canonical word with digit sum <= max_sum; digits have a heavy tail."""
    digits: list[int] = []
    budget = max_sum
    while budget >= 2 and (max_len is None or len(digits) < max_len):
        a = min(budget, max(1, int(1 / max(rng.random(), 1e-12)) - rng.randint(0, 1)))
        digits.append(a)
        budget -= a
        if rng.random() < 0.05:
            break
    if not digits:
        digits = [2]
    if digits[-1] == 1:
        digits[-1] = 2
    return tuple(digits)


def diophantine_strict(digits: tuple[int, ...]) -> bool:
    """Strict two-sided approximation bounds for every k <= len - 2."""
    x = cf.cf_value(digits)
    t = cf.convergents(digits)
    for k in range(1, len(digits) - 1):
        p, q, q1 = t.p[k], t.q[k], t.q[k + 1]
        d = abs(x - Fraction(p, q))
        if not Fraction(1, q * (q1 + q)) < d < Fraction(1, q * q1):
            return False
    return True


def roundtrip_ok(n: int) -> bool:
    for idx in range(1, 2**n + 1):
        w = sb.interval_word(n, idx)
        iv = sb.word_to_interval(w)
        back, word = sb.locate(iv.left, n)
        if word != w or back != iv:
            return False
    return True


def runlength_ok(rng: random.Random) -> bool:
    lead = rng.choice("AB")
    blocks = tuple(rng.randint(1, 6) for _ in range(rng.randint(1, 8)))
    w = cf.RunLengthWord(lead, blocks)
    digits = cf.runlength_to_cf(w).digits
    expect = (blocks[0] + 1,) + blocks[1:] if lead == "A" else (1,) + blocks
    if digits != expect or cf.cf_to_runlength(digits) != w:
        return False
    # mirror symmetry on values: value(pi*(s w)) = 1 - value(pi*(w))
    mirrored = cf.runlength_to_cf(cf.mirror(w)).digits
    return cf.cf_value(mirrored) == 1 - cf.cf_value(digits)


def _shift(word: str) -> str:
    rest = word[1:]
    return cf.mirror(rest) if word[0] == "B" else rest


def _coding_value(word: str) -> Fraction:
    runs = [len(m) for m in re.findall(r"A+|B+", word)]
    return cf.runlength_to_cf(cf.RunLengthWord(word[0], tuple(runs))).value


def commuting_ok(rng: random.Random) -> bool:
    """Farey map on values matches the (mirrored) shift on codings."""
    word = "".join(rng.choice("AB") for _ in range(rng.randint(2, 40)))
    return cf.farey_map(_coding_value(word)) == _coding_value(_shift(word))


# ------------------------------------------------------------------ checks


def _budget(b: str, quick, full):
    return quick if b == "quick" else full


def _check_partition(b):
    top = _budget(b, 14, 20)
    bad = [n for n in range(top + 1) if not _partition_ok(n)]
    return not bad, f"orders 0..{top}, failures {bad}", "exact"


def _check_bijection(b):
    top = _budget(b, 12, 16)
    bad = [n for n in range(2, top + 1) if not bijection_ok(n)]
    return not bad, f"n = 2..{top}, failures {bad}", "exact"


def _check_siblings(b):
    top = _budget(b, 10, 14)
    bad = [n for n in range(1, top + 1) if not siblings_ok(n)]
    return not bad, f"n = 1..{top}, failures {bad}", "exact"


def _check_akn_count(b):
    top = _budget(b, 18, 24)
    bad = [n for n in range(2, top + 1) if len(akn_denominators(n)) != 2 ** (n - 2)]
    return not bad, f"n = 2..{top}, failures {bad}", "exact"


def _check_qbound(b):
    rng = random.Random(46)
    samples = _budget(b, 1000, 10_000)
    if not qbound_exhaustive(20):
        return False, "exhaustive digit sums <= 20 failed", "exact"
    for _ in range(samples):
        d = random_word(rng, 200)
        if not qbound_holds(cf.continuant(d), sum(d), len(d)):
            return False, f"counterexample {list(d)}", "exact"
    return True, f"exhaustive tau <= 20 and {samples} random words", "exact"


def _check_product_bound(b):
    rng = random.Random(62)
    samples = _budget(b, 1000, 10_000)
    for _ in range(samples):
        d = random_word(rng, 200)
        prod = math.prod(d)
        q = cf.continuant(d)
        if not prod <= q <= 2 ** len(d) * prod:
            return False, f"counterexample {list(d)}", "exact"
    return True, f"{samples} random words", "exact"


def _check_diophantine(b):
    rng = random.Random(31)
    samples = _budget(b, 50, 200)
    for _ in range(samples):
        k = rng.randint(3, 32)
        d = tuple(rng.choice((1, 1, 1, 2, 2, 3, 5, 9, 40)) for _ in range(k - 1)) + (rng.randint(2, 9),)
        if not diophantine_strict(d):
            return False, f"counterexample {list(d)}", "strict"
    return True, f"{samples} random words, k <= 30", "strict"


def _check_roundtrip(b):
    top = _budget(b, 10, 14)
    bad = [n for n in range(top + 1) if not roundtrip_ok(n)]
    return not bad, f"n = 0..{top}, failures {bad}", "exact"


def _check_runlength(b):
    rng = random.Random(73)
    samples = _budget(b, 200, 1000)
    ok = all(runlength_ok(rng) for _ in range(samples))
    return ok, f"{samples} random words", "exact"


def _check_commuting(b):
    rng = random.Random(88)
    samples = _budget(b, 200, 1000)
    ok = all(commuting_ok(rng) for _ in range(samples))
    return ok, f"{samples} random words", "exact"


def _check_sandwich(b):
    thetas = (-40, -10, -2, -1, -0.5, 0)
    worst = math.inf
    for th in thetas:
        v = beta(th)
        lo, hi = -th * TWO_LOG_GAMMA, math.log(2) - th * TWO_LOG_GAMMA
        worst = min(worst, v - lo, hi - v)
    return worst >= -1e-9, worst, "min margin >= -1e-9"


def _check_asymptote(b):
    gap = beta(-30.0) + 2 * (-30.0) * math.log(GAMMA)
    return 0 <= gap <= 0.05, gap, "[0, 0.05]"


def _check_method_agreement(b):
    n = _budget(b, 18, 22)
    worst = max(abs(direct_pressure_estimate(th, n) - beta(th)) for th in (-2, -1, 0, 0.5))
    return worst <= 0.05, worst, 0.05


def _check_gauss_kuzmin(b):
    v = diophantine_pressure(1.0)
    h = 1e-4
    slope = (diophantine_pressure(1 + h) - diophantine_pressure(1 - h)) / (2 * h)
    ok = abs(v) <= 1e-10 and abs(slope + CHI) <= 1e-3
    return ok, [v, slope], ["|P_D(1)| <= 1e-10", "|P_D'(1) + chi| <= 1e-3"]


def _check_zeta(b):
    from scipy.special import zeta

    worst = math.inf
    for th in (0.6, 1.0, 2.0, 5.0):
        gap = math.log(zeta(2 * th)) - diophantine_pressure(th)
        worst = min(worst, gap, 2 * th * math.log(2) - gap)
    return worst >= -1e-9, worst, "min margin >= -1e-9"


def _check_pd_asymptote(b):
    gap = abs(diophantine_pressure(12.0) + 12 * TWO_LOG_GAMMA)
    return gap <= 0.05, gap, 0.05


def _check_levy(b):
    from .growth import monte_carlo_levy

    samples, k = _budget(b, (1000, 300), (10_000, 1000))
    r = monte_carlo_levy(samples, k, seed=7)
    z = abs(r.mean - CHI) / r.stderr
    return z <= 3, [r.mean, r.stderr, z], "within 3 standard errors of chi"


def _check_spectrum(b):
    from .spectrum import GaussSpectrum, tau

    g = GaussSpectrum()
    alphas = np.linspace(TWO_LOG_GAMMA, 6.0, 200)[1:]
    vals = np.array([g.point(a).tau for a in alphas])
    i = int(np.argmax(vals))
    near = int(np.argmin(np.abs(alphas - CHI)))
    ends = tau(0.0).tau == 1.0 and tau(TWO_LOG_GAMMA).tau == 0.0
    ok = ends and i == near and abs(vals[i] - 1) <= 2e-3
    return ok, [float(vals[i]), float(alphas[i])], "max within 2e-3 of 1 at the node nearest chi"


def _check_alpha_identity(b):
    from .spectrum import tau

    worst = 0.0
    for a in (0.3, 0.6, 0.9):
        p = tau(a)
        worst = max(worst, abs(a * p.alpha_sharp - p.alpha_star))
    return worst <= 1e-6, worst, 1e-6


_ANCHORS = {
    "partition": "order-n intervals partition [0,1) with extreme lengths from Fibonacci numbers",
    "lemma-2.1-bijection": "CF values of A_k^n are exactly the new vertices of order n-1",
    "siblings": "new neighbours of a vertex are given by the two sibling words",
    "akn-count": "the sets A_k^n together have 2^(n-2) elements",
    "lemma-4.6-qbound": "q_k <= gamma^tau_k rho^(tau_k-k-1)",
    "product-bound": "prod a_i <= q_k <= 2^k prod a_i",
    "diophantine-inequality": "1/(q_k(q_k+q_{k+1})) < |x-p_k/q_k| < 1/(q_k q_{k+1})",
    "coding-roundtrip": "word_to_interval and locate are mutually inverse",
    "runlength-mirror": "run-length rules and the mirror symmetry x -> 1-x",
    "commuting-diagram": "the Farey map acts on codings as the shift, mirrored after B",
    "prop-4.5-7-sandwich": "-2 theta log gamma <= P(theta) <= log 2 - 2 theta log gamma",
    "pressure-asymptote": "P(theta) + 2 theta log gamma -> 0 as theta -> -infinity",
    "method-agreement": "direct level sums agree with the operator root",
    "gauss-kuzmin": "P_D(1) = 0 and P_D'(1) = -chi",
    "zeta-sandwich": "0 <= log zeta(2 theta) - P_D(theta) <= 2 theta log 2",
    "pd-asymptote": "P_D(theta) + 2 theta log gamma -> 0 as theta -> infinity",
    "levy-montecarlo": "2 log q_k / k -> chi for Lebesgue-almost every x",
    "spectrum-tau-d": "tau_D has maximum 1 at chi; tau endpoint conventions",
    "alpha-identity": "alpha * alpha_sharp = alpha_star",
}

_CHECKS = {
    "partition": _check_partition,
    "lemma-2.1-bijection": _check_bijection,
    "siblings": _check_siblings,
    "akn-count": _check_akn_count,
    "lemma-4.6-qbound": _check_qbound,
    "product-bound": _check_product_bound,
    "diophantine-inequality": _check_diophantine,
    "coding-roundtrip": _check_roundtrip,
    "runlength-mirror": _check_runlength,
    "commuting-diagram": _check_commuting,
    "prop-4.5-7-sandwich": _check_sandwich,
    "pressure-asymptote": _check_asymptote,
    "method-agreement": _check_method_agreement,
    "gauss-kuzmin": _check_gauss_kuzmin,
    "zeta-sandwich": _check_zeta,
    "pd-asymptote": _check_pd_asymptote,
    "levy-montecarlo": _check_levy,
    "spectrum-tau-d": _check_spectrum,
    "alpha-identity": _check_alpha_identity,
}

CLAIMS: dict[str, Claim] = {cid: Claim(cid, _ANCHORS[cid], fn) for cid, fn in _CHECKS.items()}


def run_claims(selection: list[str] | None = None, budget: str = "full", skip: set[str] | None = None) -> VerifyReport:
    """Run the selected claims (all by default) and collect a report."""
    if budget not in ("quick", "full"):
        raise ValueError(f"budget must be 'quick' or 'full', got {budget!r}")
    ids = list(CLAIMS) if not selection else selection
    unknown = [c for c in ids if c not in CLAIMS]
    if unknown:
        raise UnknownClaim(", ".join(unknown))
    report = VerifyReport()
    for cid in ids:
        claim = CLAIMS[cid]
        if skip and cid in skip:
            report.results.append(ClaimResult(cid, claim.anchor, "skip", None, None, 0.0))
            continue
        start = time.perf_counter()
        passed, measured, bound = claim.check(budget)
        report.results.append(
            ClaimResult(cid, claim.anchor, "pass" if passed else "fail", measured, bound, time.perf_counter() - start)
        )
    return report
