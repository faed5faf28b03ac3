import io
import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

from mfsb.core import CHI, LOG2, TWO_LOG_GAMMA
from mfsb.pressure import (
    BracketError,
    PressureCurve,
    SingularDomainError,
    akn_denominators,
    beta,
    diophantine_pressure,
    diophantine_pressure_wordratio,
    diophantine_pressure_wordsum,
    direct_log_partition,
    direct_pressure_estimate,
    induced_pressure,
    is_convex_nonincreasing,
    pressure_curve,
    pressure_via_denominators,
    stern_brocot_pressure,
)
from mfsb.cont_frac import continuant, enumerate_Akn
from mfsb.stern_brocot import DepthCapError


# ------------------------------------------------------------ direct level sums


def test_direct_examples():
    for n in (1, 5, 12):
        assert direct_pressure_estimate(1, n) == 0
        assert direct_pressure_estimate(0, n) == pytest.approx(LOG2, abs=1e-14)
    assert direct_pressure_estimate(-1, 3) == pytest.approx(math.log(82) / 3, abs=1e-15)


def test_direct_matches_exact_rational_sum():
    from mfsb.stern_brocot import intervals

    for theta in (-2, -1, 2):
        exact = sum(Fraction(iv.length) ** theta for iv in intervals(8))
        assert direct_log_partition(theta, 8) == pytest.approx(
            math.log(exact.numerator) - math.log(exact.denominator), abs=1e-12
        )


def test_direct_independent_of_threads():
    assert direct_log_partition(-1.3, 19, threads=1) == direct_log_partition(-1.3, 19, threads=3)


def test_direct_guards():
    with pytest.raises(DepthCapError):
        direct_pressure_estimate(-1, 27)
    with pytest.raises(ValueError):
        direct_pressure_estimate(-1, 0)


def test_direct_gap_shrinks_monotonically():
    for theta in (-2, -1, 0.5):
        b = beta(theta)
        gaps = [abs(direct_pressure_estimate(theta, n) - b) for n in (14, 16, 18, 20)]
        assert all(x > y for x, y in zip(gaps, gaps[1:]))


# ----------------------------------------------------------- denominator route


def test_akn_denominators_match_enumeration():
    for n in range(2, 13):
        q, k = akn_denominators(n, with_lengths=True)
        ref = sorted(
            (continuant(w.digits), len(w)) for kk in range(1, n) for w in enumerate_Akn(n, kk)
        )
        assert sorted(zip(q.tolist(), k.tolist())) == ref


def test_denominator_examples():
    for n in (4, 10, 16):
        assert pressure_via_denominators(0, n) == pytest.approx(LOG2 - 2 * LOG2 / n, abs=1e-14)
    assert pressure_via_denominators(1, 4) == pytest.approx(math.log(2 / 16 + 2 / 25) / 4, abs=1e-15)


def test_denominator_sandwich_exact_sizes():
    # vertices of order n - 1 bracket the interval sums: the two neighbours of
    # every new vertex account for its two adjacent intervals
    for theta in (-1.0, -0.5, 0.0):
        for n in range(4, 18):
            z_n = direct_log_partition(theta, n)
            mid = LOG2 + pressure_via_denominators(theta, n + 1) * (n + 1)
            z_next = direct_log_partition(theta, n + 1)
            assert z_n <= mid + 1e-12 <= z_next + 2e-12


def test_denominator_and_direct_converge():
    for theta in (-1, -0.5, 0):
        gaps = [abs(pressure_via_denominators(theta, n) - direct_pressure_estimate(theta, n)) for n in (6, 10, 14, 18, 20)]
        assert all(x > y for x, y in zip(gaps, gaps[1:]))


# --------------------------------------------------------------- spectral route


def test_induced_examples():
    assert induced_pressure(0, LOG2) == pytest.approx(0, abs=1e-13)
    assert induced_pressure(1, 0) == pytest.approx(0, abs=1e-13)


def test_beta_examples():
    assert beta(0) == pytest.approx(LOG2, abs=1e-13)
    b = beta(-1)
    assert TWO_LOG_GAMMA <= b <= LOG2 + TWO_LOG_GAMMA
    assert 0 <= beta(-30) - 30 * TWO_LOG_GAMMA <= 0.05


def test_beta_root_and_domain():
    for theta in (-5, -0.3, 0.4, 0.9):
        assert abs(induced_pressure(theta, beta(theta))) < 1e-12
    with pytest.raises(ValueError):
        beta(1.0)


def test_beta_bracket_error(monkeypatch):
    import mfsb.pressure as pr

    monkeypatch.setattr(pr, "_beta_bracket", lambda theta: (5.0, 6.0))
    with pytest.raises(BracketError):
        pr.beta(-1.0)


def test_beta_derivative_matches_alpha_ratio():
    # beta' = -(d_theta P*) / (d_q P*) at the root
    theta, h = -0.7, 1e-5
    b = beta(theta)
    num = (induced_pressure(theta + h, b) - induced_pressure(theta - h, b)) / (2 * h)
    den = (induced_pressure(theta, b + h) - induced_pressure(theta, b - h)) / (2 * h)
    fd = (beta(theta + h) - beta(theta - h)) / (2 * h)
    assert fd == pytest.approx(-num / den, abs=1e-6)


def test_stern_brocot_pressure_examples():
    assert stern_brocot_pressure(1) == 0
    assert stern_brocot_pressure(2) == 0
    v = stern_brocot_pressure(0.999)
    assert 0 < v < beta(0.99)


def test_pressure_monotone_decreasing():
    thetas = np.linspace(-4, 0.95, 12)
    vals = [stern_brocot_pressure(t) for t in thetas]
    assert all(x > y for x, y in zip(vals, vals[1:]))


# ------------------------------------------------------------ Diophantine side


def test_diophantine_gauss_kuzmin():
    assert abs(diophantine_pressure(1.0)) < 1e-10
    h = 1e-4
    slope = (diophantine_pressure(1 + h) - diophantine_pressure(1 - h)) / (2 * h)
    assert slope == pytest.approx(-CHI, abs=1e-3)


@pytest.mark.parametrize("theta", [0.6, 1.0, 2.0, 5.0])
def test_zeta_sandwich(theta):
    gap = math.log(float(mp.zeta(2 * theta))) - diophantine_pressure(theta)
    assert -1e-9 <= gap <= 2 * theta * LOG2 + 1e-9


def test_diophantine_asymptote():
    assert abs(diophantine_pressure(12.0) + 12 * TWO_LOG_GAMMA) <= 0.05


def test_diophantine_domain():
    with pytest.raises(SingularDomainError):
        diophantine_pressure(0.55)
    assert math.isfinite(diophantine_pressure(0.56))


def test_wordsum_single_digit_is_zeta():
    est, err = diophantine_pressure_wordsum(2.0, 1, 10**6)
    assert err == 0
    assert est == pytest.approx(math.log(math.pi**4 / 90), abs=1e-15)


def test_wordsum_approaches_zero_at_gauss_kuzmin():
    vals = [diophantine_pressure_wordsum(1.0, k, 200)[0] for k in range(1, 8)]
    assert all(abs(x) > abs(y) for x, y in zip(vals, vals[1:]))
    assert abs(vals[-1]) < 0.01


def test_wordsum_is_lower_bound_with_bias():
    # each truncated sum is at least c * lambda**k, so the bias is O(1/k)
    for theta in (1.5, 3.0):
        op = diophantine_pressure(theta)
        ests = [diophantine_pressure_wordsum(theta, k, 64)[0] for k in (2, 4, 6)]
        assert all(e > op for e in ests)
        assert ests[0] - op > ests[2] - op


@pytest.mark.xfail(strict=True, reason="the word-sum bias at k = 8 is about 0.085, above 0.05; see notes")
def test_wordsum_k8_agrees_with_operator():
    est, _ = diophantine_pressure_wordsum(1.5, 8, 64)
    assert abs(est - diophantine_pressure(1.5)) <= 0.05


def test_wordratio_cancels_leading_bias():
    op = diophantine_pressure(2.0)
    plain = diophantine_pressure_wordsum(2.0, 5, 64)[0]
    ratio = diophantine_pressure_wordratio(2.0, 5, 64)
    assert abs(ratio - op) < abs(plain - op)


# --------------------------------------------------------------- curves & CSV


def test_induced_curve_convex_nonincreasing():
    curve = pressure_curve("induced-root", np.linspace(-10, 0.99, 111))
    assert is_convex_nonincreasing(curve)


def test_curve_csv_roundtrip():
    curve = pressure_curve("operator-eig", [0.7, 1.0, 2.0, 3.5])
    buf = io.StringIO()
    curve.to_csv(buf)
    buf.seek(0)
    back = PressureCurve.from_csv(buf)
    assert np.array_equal(back.theta_grid, curve.theta_grid)
    assert np.array_equal(back.values, curve.values)
    assert back.method == "operator-eig" and back.params == {"degree": 32}


def test_curve_validation():
    with pytest.raises(ValueError):
        PressureCurve([0.0, 0.0], [1.0, 1.0], "induced-root")
    with pytest.raises(ValueError):
        PressureCurve([0.0, 1.0], [1.0, 1.0], "magic")
    with pytest.raises(ValueError):
        pressure_curve("magic", [0.0])


def test_curve_methods_agree_roughly():
    thetas = [-1.0, 0.0]
    a = pressure_curve("direct-level", thetas, level=16)
    b = pressure_curve("induced-root", thetas)
    assert np.max(np.abs(a.values - b.values)) < 0.05
