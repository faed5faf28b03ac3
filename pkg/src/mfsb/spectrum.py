"""Legendre transforms and the multifractal spectra tau (Farey side) and tau_D (Gauss side).

Both spectra are conjugates of a convex pressure:

    tau(alpha)   = inf_theta (theta + P(theta) / alpha),    0 < alpha < 2 log gamma,
    tau_D(alpha) = inf_theta (theta + P_D(theta) / alpha),  alpha > 2 log gamma.

The infimum sits at ``t(alpha)``, where the pressure has slope ``-alpha``.
On the Farey side the slope comes from the induced pressure P*(theta, q) at
``q = beta(theta)``: ``-P'(theta) = alpha_star / alpha_sharp`` with
``alpha_star = -d P*/d theta`` and ``alpha_sharp = -d P*/d q``.  Each side
keeps a dense theta-grid of pressures and slopes; ``t(alpha)`` is read off
that grid by monotone inverse interpolation and then polished against the
exact slope.
"""
from __future__ import annotations

import csv
import enum
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import IO, Callable, Iterable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq, minimize_scalar

from .core import CHI, TWO_LOG_GAMMA, fmt_float
from .pressure import (
    PD_DOMAIN_CUT,
    PressureCurve,
    beta,
    diophantine_pressure,
    induced_pressure,
)
from .transfer import DEFAULT_DEGREE, DEFAULT_DIGIT_CAP

__all__ = [
    "Marker",
    "INF",
    "NEG_INF",
    "ConjugateDomainError",
    "SpectrumDomainError",
    "SpectrumPoint",
    "SpectrumCurve",
    "FareySpectrum",
    "GaussSpectrum",
    "legendre",
    "double_legendre",
    "farey_slope_data",
    "t_of_alpha",
    "tau",
    "tau_d",
    "alpha_star_sharp",
    "spectrum_curve",
    "ALPHA_MAX",
    "SPECTRUM_COLUMNS",
]

ALPHA_MAX = 6.0
SPECTRUM_COLUMNS = ("alpha", "tau", "t_of_alpha", "alpha_star", "alpha_sharp")


class Marker(enum.Enum):
    """Explicit infinite values, kept apart from floats."""

    INF = "inf"
    NEG_INF = "-inf"

    def __str__(self) -> str:
        return self.value


INF = Marker.INF
NEG_INF = Marker.NEG_INF


class ConjugateDomainError(ValueError):
    """Slope outside the range where the conjugate is attained."""


class SpectrumDomainError(ValueError):
    """alpha outside the domain of the requested spectrum."""


def _fmt(v) -> str:
    return str(v) if isinstance(v, Marker) else fmt_float(v)


def _json_value(v):
    return str(v) if isinstance(v, Marker) else float(v)


@dataclass(frozen=True)
class SpectrumPoint:
    alpha: float
    tau: float
    t_of_alpha: float | Marker
    alpha_star: float | Marker
    alpha_sharp: float | Marker
    # tau'(alpha) from the identity -P(t)/alpha**2 (None at conventional endpoints)
    dtau: float | None = None
    status: str = "ok"

    def to_dict(self) -> dict:
        return {k: _json_value(getattr(self, k)) for k in SPECTRUM_COLUMNS} | {"status": self.status}


@dataclass
class SpectrumCurve:
    points: list[SpectrumPoint]
    kind: str
    source: PressureCurve | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in ("farey-tau", "gauss-tauD"):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")

    @property
    def alphas(self) -> np.ndarray:
        return np.array([p.alpha for p in self.points])

    @property
    def taus(self) -> np.ndarray:
        return np.array([p.tau for p in self.points])

    def segment_checks(self) -> list[str]:
        """Per-row monotonicity against the previous row.

        ``tau`` must decrease in alpha; ``tau_D`` must increase up to chi and
        decrease after it.  Labels: ``up``, ``down``, ``peak`` (pair straddles
        chi), ``flat`` (equal values) or ``violation``; the first row is ``-``.
        """
        out = ["-"] if self.points else []
        for prev, cur in zip(self.points, self.points[1:]):
            if cur.tau == prev.tau:
                out.append("flat")
                continue
            rising = cur.tau > prev.tau
            if self.kind == "gauss-tauD" and prev.alpha < CHI < cur.alpha:
                out.append("peak")
            elif self.kind == "gauss-tauD" and cur.alpha <= CHI:
                out.append("up" if rising else "violation")
            else:
                out.append("violation" if rising else "down")
        return out

    def to_csv(self, fh: IO[str]) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SPECTRUM_COLUMNS + ("status", "segment"))
        for p, seg in zip(self.points, self.segment_checks()):
            writer.writerow([_fmt(getattr(p, k)) for k in SPECTRUM_COLUMNS] + [p.status, seg])

    def to_json(self) -> str:
        rows = [p.to_dict() | {"segment": seg} for p, seg in zip(self.points, self.segment_checks())]
        return json.dumps({"kind": self.kind, "points": rows}, indent=1)


# ------------------------------------------------------------------ Legendre


def _golden_max(f: Callable[[float], float], xs: np.ndarray, fx: np.ndarray) -> tuple[float, float]:
    """Maximise ``f`` starting from samples ``fx = f(xs)``; golden section around the best node."""
    j = int(np.argmax(fx))
    best_x, best_f = float(xs[j]), float(fx[j])
    if 0 < j < len(xs) - 1:
        a, b, c = float(xs[j - 1]), best_x, float(xs[j + 1])
        res = minimize_scalar(lambda x: -f(x), bracket=(a, b, c), method="golden", options={"xtol": 1e-12})
        if a <= res.x <= c and -res.fun > best_f:
            best_x, best_f = float(res.x), float(-res.fun)
    return best_f, best_x


def legendre(curve: PressureCurve, t: float, refine: bool = True) -> tuple[float, float]:
    """``sup_theta (theta t - P(theta))`` and the maximising theta.

    The supremum is taken over the grid, then refined by golden-section
    search between the neighbours of the best node.  Between nodes the curve
    is evaluated through ``curve(theta)``.
    """
    lo, hi = curve.slope_range()
    slack = 1e-12 * max(1.0, abs(t))
    if not lo - slack <= t <= hi + slack:
        raise ConjugateDomainError(f"slope {t} outside [{lo}, {hi}]")
    xs = curve.theta_grid
    fx = xs * t - curve.values
    if not refine:
        j = int(np.argmax(fx))
        return float(fx[j]), float(xs[j])
    return _golden_max(lambda th: th * t - curve(th), xs, fx)


def double_legendre(curve: PressureCurve, theta: float) -> float:
    """``sup_t (theta t - Phat(t))``, which equals P(theta) for convex P.

    The inner transform refines between nodes with the curve's interpolant
    rather than ``curve.func``; exact node values and slopes make that
    interpolant accurate enough and keep the nested search cheap.
    """
    if curve.derivatives is not None:
        ts = np.unique(curve.derivatives)
    else:
        ts = np.unique(curve.slopes())
    inner = curve.detached()
    conj = lambda t: legendre(inner, t)[0]  # noqa: E731
    ft = np.array([theta * t - conj(t) for t in ts])
    value, _ = _golden_max(lambda t: theta * t - conj(t), ts, ft)
    return value


# ------------------------------------------------------------- Farey side


def farey_slope_data(
    theta: float, degree: int = DEFAULT_DEGREE, digit_cap: int = DEFAULT_DIGIT_CAP
) -> tuple[float, float, float]:
    """``(beta, alpha_star, alpha_sharp)`` at ``(theta, beta(theta))`` by central differences."""
    b = beta(theta, degree, digit_cap)
    ht = min(1e-5 * max(1.0, abs(theta)), 0.25 * (1.0 - theta))
    hq = min(1e-5 * max(1.0, b), 0.25 * b)
    if hq <= 0 or ht <= 0:
        raise ArithmeticError(f"difference step underflow at theta = {theta}")
    p = lambda th, q: induced_pressure(th, q, degree, digit_cap)  # noqa: E731
    a_star = -(p(theta + ht, b) - p(theta - ht, b)) / (2 * ht)
    a_sharp = -(p(theta, b + hq) - p(theta, b - hq)) / (2 * hq)
    return b, a_star, a_sharp


def _farey_grid() -> np.ndarray:
    # uniform on the bulk, logarithmic towards theta = 1 where t(alpha) piles up
    return np.concatenate([np.arange(-40.0, 0.75, 0.25), 1.0 - 10.0 ** -np.arange(0.75, 8.001, 0.25)])


def _polish(g: Callable[[float], float], x0: float, lo: float, hi: float, g_lo: float, g_hi: float) -> float:
    """Root of the monotone ``g`` in ``[lo, hi]``: secant from ``x0``, bisection-safe fallback."""
    step = 1e-4 * (hi - lo)
    x1 = min(max(x0, lo + step), hi - step)
    x_prev = x1 - step if x1 - step > lo else x1 + step
    g_prev, g1 = g(x_prev), g(x1)
    for _ in range(10):
        if abs(g1) < 1e-10 or g1 == g_prev:
            return x1
        x2 = x1 - g1 * (x1 - x_prev) / (g1 - g_prev)
        if not lo < x2 < hi:
            break
        x_prev, g_prev, x1 = x1, g1, x2
        g1 = g(x1)
        if abs(x1 - x_prev) <= 1e-12 * max(1.0, abs(x1)):
            return x1
    if g_lo * g_hi > 0:
        return x1
    return brentq(g, lo, hi, xtol=1e-14)


class _Side:
    """Shared inverse-slope machinery: ``alpha(theta)`` decreasing on a sorted grid."""

    theta: np.ndarray
    values: np.ndarray
    alpha: np.ndarray

    def _setup_inverse(self) -> None:
        self._inverse = PchipInterpolator(self.alpha[::-1], self.theta[::-1])

    def slope_at(self, theta: float) -> float:
        raise NotImplementedError

    def locate(self, alpha: float, polish: bool = True) -> tuple[float, str]:
        """``t(alpha)`` with a status: ``ok``, ``clipped-high`` or ``clipped-low``."""
        a = self.alpha
        if alpha >= a[0]:
            return float(self.theta[0]), "clipped-low"
        if alpha <= a[-1]:
            return float(self.theta[-1]), "clipped-high"
        t0 = float(self._inverse(alpha))
        if not polish:
            return t0, "ok"
        # a is decreasing: bracket nodes with a[i] >= alpha > a[i+1]
        i = int(np.searchsorted(-a, -alpha, side="right")) - 1
        lo, hi = float(self.theta[i]), float(self.theta[i + 1])
        g = lambda th: self.slope_at(th) - alpha  # noqa: E731
        return _polish(g, t0, lo, hi, a[i] - alpha, a[i + 1] - alpha), "ok"


class FareySpectrum(_Side):
    """tau(alpha) for 0 <= alpha <= 2 log gamma, built from beta on a theta-grid.

    As alpha decreases to 0 the optimising theta approaches 1 only
    logarithmically (alpha ~ (pi**2/6)/log(1/(1-theta))), so alphas below the
    slope at the last grid node are clipped there and flagged; the reported tau
    is then the upper enclosure ``min(1, t + beta(t)/alpha)``, the true value
    lying between the last node and that number.
    """

    def __init__(
        self,
        grid: Sequence[float] | None = None,
        degree: int = DEFAULT_DEGREE,
        digit_cap: int = DEFAULT_DIGIT_CAP,
        threads: int = 1,
    ) -> None:
        self.degree, self.digit_cap = degree, digit_cap
        theta = np.asarray(sorted(_farey_grid() if grid is None else grid), dtype=float)
        if theta[-1] >= 1:
            raise SpectrumDomainError("Farey grid must stay below theta = 1")
        self._cache: dict[float, tuple[float, float, float]] = {}
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                data = list(pool.map(self._data, theta))
        else:
            data = [self._data(t) for t in theta]
        self.theta = theta
        self.values = np.array([d[0] for d in data])
        self.alpha_star = np.array([d[1] for d in data])
        self.alpha_sharp = np.array([d[2] for d in data])
        self.alpha = self.alpha_star / self.alpha_sharp
        if np.any(np.diff(self.alpha) >= 0):
            raise ArithmeticError("computed slopes are not strictly monotone on the grid")
        self._setup_inverse()

    def _data(self, theta: float) -> tuple[float, float, float]:
        theta = float(theta)
        if theta not in self._cache:
            self._cache[theta] = farey_slope_data(theta, self.degree, self.digit_cap)
        return self._cache[theta]

    def slope_at(self, theta: float) -> float:
        _, a_star, a_sharp = self._data(theta)
        return a_star / a_sharp

    def pressure_curve(self, with_func: bool = True) -> PressureCurve:
        """P on the grid plus theta = 1 (value 0, slope 0), with exact slopes."""
        func = None
        if with_func:
            func = lambda th: 0.0 if th >= 1 else beta(th, self.degree, self.digit_cap)  # noqa: E731
        return PressureCurve(
            np.append(self.theta, 1.0),
            np.append(self.values, 0.0),
            "induced-root",
            {"degree": self.degree, "digit_cap": self.digit_cap},
            func=func,
            derivatives=np.append(-self.alpha, 0.0),
            slope_bounds=(-TWO_LOG_GAMMA, 0.0),
        )

    def point(self, alpha: float, polish: bool = True) -> SpectrumPoint:
        alpha = float(alpha)
        if not 0.0 <= alpha <= TWO_LOG_GAMMA:
            raise SpectrumDomainError(f"tau is defined on [0, 2 log gamma], got {alpha}")
        if alpha == 0.0:
            return SpectrumPoint(0.0, 1.0, 1.0, CHI, INF, None, "convention")
        if alpha == TWO_LOG_GAMMA:
            # blocks of length one along the golden branch: alpha_star -> 2 log gamma, alpha_sharp -> 1
            return SpectrumPoint(alpha, 0.0, NEG_INF, TWO_LOG_GAMMA, 1.0, None, "convention")
        t, status = self.locate(alpha, polish)
        b, a_star, a_sharp = self._data(t)
        value = t + b / alpha
        if status == "clipped-high":
            value = min(1.0, value)
        return SpectrumPoint(alpha, value, t, a_star, a_sharp, -b / alpha**2, status)

    def curve(self, alphas: Iterable[float], polish: bool = True) -> SpectrumCurve:
        return SpectrumCurve([self.point(a, polish) for a in alphas], "farey-tau", self.pressure_curve(False))


# ------------------------------------------------------------- Gauss side


def _pd_slope(theta: float, degree: int, digit_cap: int) -> float:
    h = 1e-5 * min(max(1.0, theta), 10.0 * (theta - 0.5))
    return (
        diophantine_pressure(theta + h, degree, digit_cap, margin=0.0)
        - diophantine_pressure(theta - h, degree, digit_cap, margin=0.0)
    ) / (2 * h)


def _gauss_grid() -> np.ndarray:
    return 0.5 + np.exp(np.linspace(math.log(PD_DOMAIN_CUT + 0.01 - 0.5), math.log(29.5), 150))


class GaussSpectrum(_Side):
    """tau_D(alpha) for 2 log gamma <= alpha <= alpha_max, built from P_D on a theta-grid.

    On this side the block function is identically one, so ``alpha_sharp = 1``
    and ``alpha_star = alpha``.
    """

    def __init__(
        self,
        grid: Sequence[float] | None = None,
        degree: int = DEFAULT_DEGREE,
        digit_cap: int = DEFAULT_DIGIT_CAP,
        alpha_max: float = ALPHA_MAX,
    ) -> None:
        self.degree, self.digit_cap, self.alpha_max = degree, digit_cap, alpha_max
        theta = np.asarray(sorted(_gauss_grid() if grid is None else grid), dtype=float)
        if theta[0] <= PD_DOMAIN_CUT:
            raise SpectrumDomainError(f"Gauss grid must stay above theta = {PD_DOMAIN_CUT}")
        self.theta = theta
        self.values = np.array([diophantine_pressure(t, degree, digit_cap) for t in theta])
        self.alpha = -np.array([_pd_slope(t, degree, digit_cap) for t in theta])
        if np.any(np.diff(self.alpha) >= 0):
            raise ArithmeticError("computed slopes are not strictly monotone on the grid")
        self._setup_inverse()

    def slope_at(self, theta: float) -> float:
        return -_pd_slope(theta, self.degree, self.digit_cap)

    def pressure_curve(self, with_func: bool = True) -> PressureCurve:
        func = (lambda th: diophantine_pressure(th, self.degree, self.digit_cap)) if with_func else None
        return PressureCurve(
            self.theta,
            self.values,
            "operator-eig",
            {"degree": self.degree, "digit_cap": self.digit_cap},
            func=func,
            derivatives=-self.alpha,
        )

    def point(self, alpha: float, polish: bool = True) -> SpectrumPoint:
        alpha = float(alpha)
        if alpha < TWO_LOG_GAMMA:
            raise SpectrumDomainError(f"tau_D needs alpha >= 2 log gamma, got {alpha}")
        if alpha > self.alpha_max:
            raise SpectrumDomainError(f"alpha {alpha} beyond the grid cap {self.alpha_max}")
        if alpha == TWO_LOG_GAMMA:
            return SpectrumPoint(alpha, 0.0, INF, alpha, 1.0, None, "convention")
        t, status = self.locate(alpha, polish)
        p = diophantine_pressure(t, self.degree, self.digit_cap)
        return SpectrumPoint(alpha, t + p / alpha, t, alpha, 1.0, -p / alpha**2, status)

    def curve(self, alphas: Iterable[float], polish: bool = True) -> SpectrumCurve:
        return SpectrumCurve([self.point(a, polish) for a in alphas], "gauss-tauD", self.pressure_curve(False))


# ------------------------------------------------------- module-level API


@lru_cache(maxsize=4)
def _farey(degree: int = DEFAULT_DEGREE, digit_cap: int = DEFAULT_DIGIT_CAP) -> FareySpectrum:
    return FareySpectrum(degree=degree, digit_cap=digit_cap)


@lru_cache(maxsize=4)
def _gauss(
    degree: int = DEFAULT_DEGREE, digit_cap: int = DEFAULT_DIGIT_CAP, alpha_max: float = ALPHA_MAX
) -> GaussSpectrum:
    return GaussSpectrum(degree=degree, digit_cap=digit_cap, alpha_max=alpha_max)


def t_of_alpha(alpha: float, side: str = "farey") -> tuple[float, str]:
    """``(P')^{-1}(-alpha)`` on the chosen side, with a clipping status."""
    if side == "farey":
        if not 0 < alpha < TWO_LOG_GAMMA:
            raise SpectrumDomainError(f"Farey side needs 0 < alpha < 2 log gamma, got {alpha}")
        return _farey().locate(alpha)
    if side == "gauss":
        if alpha <= TWO_LOG_GAMMA:
            raise SpectrumDomainError(f"Gauss side needs alpha > 2 log gamma, got {alpha}")
        return _gauss().locate(alpha)
    raise ValueError(f"side must be 'farey' or 'gauss', got {side!r}")


def tau(alpha: float) -> SpectrumPoint:
    return _farey().point(alpha)


def tau_d(alpha: float, alpha_max: float = ALPHA_MAX) -> SpectrumPoint:
    return _gauss(alpha_max=alpha_max).point(alpha)


def alpha_star_sharp(alpha: float) -> tuple[float | Marker, float | Marker]:
    """``(alpha_star, alpha_sharp)`` at ``(t(alpha), beta(t(alpha)))``; ``(chi, INF)`` at 0."""
    p = tau(alpha)
    return p.alpha_star, p.alpha_sharp


def spectrum_curve(kind: str, alphas: Iterable[float], polish: bool = True, **kw) -> SpectrumCurve:
    if kind == "farey-tau":
        return _farey(**kw).curve(alphas, polish)
    if kind == "gauss-tauD":
        return _gauss(**kw).curve(alphas, polish)
    raise ValueError(f"unknown spectrum kind {kind!r}")
