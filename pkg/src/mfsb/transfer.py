"""Chebyshev collocation of the weighted Gauss transfer operator.

The operator acting on functions of [0, 1] is

    (L f)(x) = sum_{n >= 1} exp(-q n) (n + x)**(-2 theta) f(1 / (n + x)).

``q = 0`` gives the Diophantine operator, ``q > 0`` the induced operator whose
zero in ``q`` is the Stern-Brocot pressure.  We discretise a conjugated copy
``f(x) = (x + gamma)**(-2 theta) g(x)`` that has the same spectrum; for the
single branch ``n = 1`` the eigenfunction ``g`` is then exactly constant, which
keeps ``g`` tame for very negative and very positive ``theta``.

Branches ``n <= digit_cap`` are collocated directly.  The remaining infinite
tail is summed in closed form: ``g`` is interpolated on ``[0, 1/(digit_cap+1)]``
by a low-degree polynomial in ``y = 1/(n + x)``, which reduces the tail to the
sums ``sum_{n > N} exp(-q n) (n + x)**(-s)``; those are evaluated with
Euler-Maclaurin and an incomplete-gamma integral.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .core import GAMMA

__all__ = [
    "InducedOperator",
    "NumericalFailure",
    "SingularDomainError",
    "chebyshev_nodes",
    "barycentric_matrix",
    "hurwitz_lerch_tail",
    "build_operator",
    "leading_eigenvalue",
    "log_eigenvalue",
    "DEFAULT_DEGREE",
    "DEFAULT_DIGIT_CAP",
]

DEFAULT_DEGREE = 32
DEFAULT_DIGIT_CAP = 64
TAIL_NODES = 8
EM_TERMS = 5
POWER_TOL = 1e-15
POWER_MAXITER = 20_000

_INV_GAMMA = GAMMA - 1.0
# Bernoulli numbers B_2, B_4, ..., B_12
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730)


class NumericalFailure(RuntimeError):
    """Power iteration or a tail estimate did not reach the requested accuracy."""


class SingularDomainError(ValueError):
    """Parameters where the operator is not trace-class (the sums diverge)."""


@dataclass(frozen=True, eq=False)
class InducedOperator:
    theta: float
    q: float
    degree: int
    digit_cap: int
    nodes: np.ndarray
    matrix: np.ndarray
    tail_error: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


@lru_cache(maxsize=None)
def _cheb(m: int) -> tuple[np.ndarray, np.ndarray]:
    j = np.arange(m + 1)
    x = 0.5 * (1.0 - np.cos(np.pi * j / m))
    w = (-1.0) ** j
    w[0] *= 0.5
    w[-1] *= 0.5
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def chebyshev_nodes(m: int) -> np.ndarray:
    """The ``m + 1`` Chebyshev-Lobatto points of [0, 1], increasing."""
    return _cheb(m)[0]


def barycentric_matrix(nodes: np.ndarray, weights: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Rows hold the Lagrange basis of ``nodes`` evaluated at each point of ``y``."""
    y = np.asarray(y, dtype=float).reshape(-1)
    diff = y[:, None] - nodes[None, :]
    exact = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = weights[None, :] / diff
        out = terms / terms.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    if hit.any():
        out[hit] = exact[hit].astype(float)
    return out


def _scaled_expint_cf(s: float, z: np.ndarray) -> np.ndarray:
    """``exp(z) E_s(z)`` for ``z > 1`` by the modified Lentz continued fraction."""
    tiny = 1e-300
    b = z + s
    c = np.full_like(z, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, 1000):
        an = -i * (s - 1.0 + i)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = c * d
        h = h * delta
        if np.all(np.abs(delta - 1.0) < 1e-15):
            break
    return h


def _log_expint(s: float, z: np.ndarray) -> np.ndarray:
    """``log E_s(z)`` with ``E_s(z) = int_1^inf exp(-z t) t**-s dt`` for ``z > 0``."""
    z = np.asarray(z, dtype=float)
    if s < 1.0:
        a = 1.0 - s
        with np.errstate(divide="ignore"):
            return (s - 1.0) * np.log(z) + special.gammaln(a) + np.log(special.gammaincc(a, z))
    out = np.empty_like(z)
    big = z > 1.0
    if big.any():
        out[big] = np.log(_scaled_expint_cf(s, z[big])) - z[big]
    if (~big).any():
        out[~big] = _log_expint_small(s, z[~big])
    return out


@lru_cache(maxsize=None)
def _legendre_rule(m: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(m)


def _log_expint_small(s: float, z: np.ndarray) -> np.ndarray:
    # E_s(z) = int_0^inf exp(-z e^u - (s - 1) u) du; the integrand is entire and
    # dies double-exponentially past u = log(1/z), so a few Gauss panels suffice
    x, w = _legendre_rule(48)
    upper = np.log(800.0 / z)
    edges = np.linspace(0.0, 1.0, 9)
    total = np.zeros_like(z)
    for a, b in zip(edges[:-1], edges[1:]):
        u = upper[:, None] * (a + (b - a) * (x[None, :] + 1.0) / 2.0)
        f = np.exp(-z[:, None] * np.exp(u) - (s - 1.0) * u)
        total += (f @ w) * upper * (b - a) / 2.0
    return np.log(total)


def hurwitz_lerch_tail(s: float, q: float, a: np.ndarray, start: int) -> tuple[np.ndarray, np.ndarray]:
    """``sum_{n >= start} exp(-q n) (n + a)**(-s)`` and an error estimate, per shift ``a``.

    Euler-Maclaurin at ``start`` with the integral written through the
    generalised exponential integral.  Needs ``q > 0``, or ``q == 0`` and ``s > 1``.
    """
    a = np.asarray(a, dtype=float)
    u = start + a
    if q < 0:
        raise SingularDomainError(f"q must be nonnegative, got {q}")
    if q == 0.0:
        if s <= 1.0:
            raise SingularDomainError(f"sum of n**-{s} diverges")
        log_int = (1.0 - s) * np.log(u) - math.log(s - 1.0)
    else:
        z = q * u
        log_int = q * a + (1.0 - s) * np.log(u) + np.where(z > 700.0, -np.inf, _log_expint(s, np.minimum(z, 700.0)))
    integral = np.exp(log_int)

    # derivatives of g(t) = exp(-q t) (t + a)**-s at t = start, as multiples of g(start)
    log_g = -q * start - s * np.log(u)
    g0 = np.exp(log_g)
    inv_u = 1.0 / u
    # rising factorials (s)_i
    rising = [1.0]
    for i in range(1, 2 * EM_TERMS + 2):
        rising.append(rising[-1] * (s + i - 1))

    def deriv_factor(k: int) -> np.ndarray:
        total = np.zeros_like(u)
        for i in range(k + 1):
            total = total + math.comb(k, i) * (-q) ** (k - i) * (-1) ** i * rising[i] * inv_u**i
        return total

    correction = 0.5 * np.ones_like(u)
    for j in range(1, EM_TERMS + 1):
        b = _BERNOULLI[j - 1] / math.factorial(2 * j)
        correction = correction - b * deriv_factor(2 * j - 1)
    j = EM_TERMS + 1
    err = np.abs(g0 * _BERNOULLI[j - 1] / math.factorial(2 * j) * deriv_factor(2 * j - 1))
    return integral + g0 * correction, err


@lru_cache(maxsize=64)
def _tail_interpolation(h: float, r: int) -> tuple[np.ndarray, np.ndarray]:
    # Chebyshev points of the first kind on [0, h] and the monomial coefficients
    # (in y/h) of their Lagrange polynomials
    k = np.arange(r)
    t = 0.5 * (1.0 - np.cos((2 * k + 1) * np.pi / (2 * r)))
    vander = np.vander(t, r, increasing=True)
    coeffs = np.linalg.inv(vander)  # coeffs[power, node]
    z = h * t
    z.setflags(write=False)
    coeffs.setflags(write=False)
    return z, coeffs


def build_operator(
    theta: float,
    q: float = 0.0,
    degree: int = DEFAULT_DEGREE,
    digit_cap: int = DEFAULT_DIGIT_CAP,
) -> InducedOperator:
    """Collocation matrix of the (conjugated) operator at Chebyshev-Lobatto nodes."""
    theta = float(theta)
    q = float(q)
    if q < 0:
        raise SingularDomainError(f"q must be nonnegative, got {q}")
    if q == 0.0 and theta <= 0.5:
        raise SingularDomainError(f"operator diverges for q = 0 and theta = {theta} <= 1/2")
    if degree < 2 or digit_cap < 1:
        raise ValueError("degree must be >= 2 and digit_cap >= 1")

    x, w = _cheb(degree)
    two_theta = 2.0 * theta
    log_shift = np.log(x + GAMMA)

    n = np.arange(1, digit_cap + 1, dtype=float)[:, None]
    nx = n + x[None, :]
    y = 1.0 / nx
    log_weight = -q * n + two_theta * (log_shift[None, :] - np.log1p(GAMMA * nx))
    weight = np.exp(log_weight)
    basis = barycentric_matrix(x, w, y).reshape(digit_cap, degree + 1, degree + 1)
    matrix = np.einsum("ni,nij->ij", weight, basis)

    # tail n > digit_cap: weight = pref(x) * (n+x)**-2theta * (1 + y/gamma)**-2theta * exp(-q n)
    start = digit_cap + 1
    h = 1.0 / start
    z, coeffs = _tail_interpolation(h, TAIL_NODES)
    sums = np.empty((degree + 1, TAIL_NODES))
    errs = np.empty((degree + 1, TAIL_NODES))
    for r in range(TAIL_NODES):
        total, err = hurwitz_lerch_tail(two_theta + r, q, x, start)
        scale = h ** (-r)
        sums[:, r] = total * scale
        errs[:, r] = err * scale
    log_pref = two_theta * (log_shift - math.log(GAMMA))
    node_weights = (sums @ coeffs) * np.exp(log_pref)[:, None]
    node_factor = np.exp(-two_theta * np.log1p(_INV_GAMMA * z))
    tail = node_weights @ (node_factor[:, None] * barycentric_matrix(x, w, z))
    matrix = matrix + tail
    tail_error = float(np.max((np.abs(errs) @ np.abs(coeffs)).sum(axis=1) * np.exp(log_pref)))
    return InducedOperator(theta, q, degree, digit_cap, x, matrix, tail_error)


def leading_eigenvalue(
    matrix: np.ndarray, tol: float = POWER_TOL, maxiter: int = POWER_MAXITER
) -> tuple[float, np.ndarray]:
    """Perron eigenvalue and eigenvector by power iteration (max-norm scaling)."""
    v = np.ones(matrix.shape[0])
    lam = 0.0
    best, stale = math.inf, 0
    for _ in range(maxiter):
        w = matrix @ v
        new_lam = float(np.max(np.abs(w)))
        if not np.isfinite(new_lam) or new_lam == 0.0:
            raise NumericalFailure("power iteration broke down (zero or non-finite iterate)")
        w = w / new_lam
        dv = float(np.max(np.abs(w - v)))
        dlam = abs(new_lam - lam) / new_lam
        v, lam = w, new_lam
        if dv <= tol and dlam <= tol:
            return lam, v
        # rounding floor: no further progress once changes sit at ulp level
        if dv < best:
            best, stale = dv, 0
        else:
            stale += 1
        if stale >= 8 and best <= 1e-12:
            return lam, v
    raise NumericalFailure(f"power iteration did not converge in {maxiter} steps (last change {dv:.2e})")


def log_eigenvalue(
    theta: float,
    q: float = 0.0,
    degree: int = DEFAULT_DEGREE,
    digit_cap: int = DEFAULT_DIGIT_CAP,
) -> float:
    op = build_operator(theta, q, degree=degree, digit_cap=digit_cap)
    lam, _ = leading_eigenvalue(op.matrix)
    return math.log(lam)
