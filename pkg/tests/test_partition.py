"""Partition recurrence, grand partition, saddle point, contour quadrature."""

import math
import random
from fractions import Fraction

import pytest

from bealloc import (
    CapExceeded,
    DomainError,
    InputError,
    build_instance,
    from_fractions,
    grand_partition,
    iter_compositions,
    saddle_nu,
    solve_sigma,
    z_exact,
    z_integral,
    z_saddle,
)
from conftest import random_instance

LN2 = math.log(2.0)


def build_example():
    return build_instance(["1", "2", "3"], 0, 2, "8")


def slack_copy(inst):
    """Same modes and unit total, budget lifted so every composition fits."""
    k = inst.bounds.min_shares
    m = inst.bounds.max_shares
    return from_fractions(
        inst.schedule.prices, k, m, m * inst.weights.values[0]
    )


def brute_force_log_z(inst, beta):
    # shifted sum: the raw terms overflow for beta < 0 at cent-scale weights
    slack = slack_copy(inst)
    xs = [-beta * float(c.energy(slack)) for c in iter_compositions(slack)]
    shift = max(xs)
    return shift + math.log(math.fsum(math.exp(x - shift) for x in xs))


def test_z_exact_beta_zero_counts_compositions():
    # every composition contributes 1: C(2 + 1, 1) = 3
    zx = z_exact(build_example(), 0.0)
    assert zx.mantissa * math.exp(zx.exponent) == pytest.approx(3.0, rel=1e-12)
    assert zx.log == pytest.approx(math.log(3.0), rel=1e-12)


def test_z_exact_two_mode_hand_value():
    # weights (5, 3), one unit, beta 0.1: e^-0.5 + e^-0.3
    inst = build_instance(["1", "2", "3"], 0, 1, "5")
    expected = math.exp(-0.5) + math.exp(-0.3)
    assert z_exact(inst, 0.1).log == pytest.approx(
        math.log(expected), rel=1e-12
    )


def test_z_exact_empty_span_is_one():
    inst = from_fractions([Fraction(1), Fraction(2)], 1, 1, Fraction(3))
    zx = z_exact(inst, 0.7)
    assert zx.mantissa == 1.0
    assert zx.exponent == 0


def test_z_exact_against_brute_force():
    rng = random.Random(41)
    for _ in range(30):
        inst = random_instance(rng, s_max=6, n_max=12)
        beta = rng.uniform(-1.0, 1.0)
        assert z_exact(inst, beta).log == pytest.approx(
            brute_force_log_z(inst, beta), rel=1e-12, abs=1e-12
        )


def test_z_exact_respects_caps():
    inst = from_fractions([Fraction(1)] * 2, 0, 10_001, Fraction(20_002))
    with pytest.raises(CapExceeded):
        z_exact(inst, 0.1)


def test_grand_partition_hand_value():
    gp = grand_partition(build_example(), 0.0, -LN2)
    # both occupancies are 1, so the count derivative is 2 and the
    # curvature sums occ*(occ+1) = 2 per mode
    assert gp.dlog_dnu == pytest.approx(2.0, abs=1e-12)
    assert gp.d2log_dnu2 == pytest.approx(4.0, abs=1e-12)
    assert gp.log_value == pytest.approx(2.0 * math.log(2.0), abs=1e-12)


def test_grand_partition_pole_rejected():
    inst = build_example()
    with pytest.raises(DomainError):
        grand_partition(inst, 0.0, 0.0)
    with pytest.raises(DomainError):
        grand_partition(inst, 1.0, 3.0)


def test_grand_partition_derivative_identities():
    # finite differences of log zeta must match the analytic sums
    rng = random.Random(17)
    h = 1e-5
    for _ in range(100):
        inst = random_instance(rng, s_max=10, n_max=10)
        beta = rng.uniform(-1.0, 1.5)
        pole = min(beta * float(w) for w in inst.mode_weights)
        nu = pole - rng.uniform(0.05, 2.0)
        gp = grand_partition(inst, beta, nu)
        lp = grand_partition(inst, beta, nu + h).log_value
        lm = grand_partition(inst, beta, nu - h).log_value
        d1 = (lp - lm) / (2.0 * h)
        d2 = (lp - 2.0 * gp.log_value + lm) / (h * h)
        assert d1 == pytest.approx(gp.dlog_dnu, rel=1e-6, abs=1e-8)
        assert d2 == pytest.approx(gp.d2log_dnu2, rel=1e-5, abs=1e-6)


def test_saddle_point_matches_sigma_solve():
    inst = build_example()
    assert saddle_nu(inst, 0.0) == pytest.approx(-LN2, abs=1e-9)
    assert saddle_nu(inst, 0.4) == solve_sigma(inst, 0.4)


def test_z_saddle_single_mode_closed_form():
    # one mode: Z = t^n exactly, and the Gaussian estimate has the closed
    # ratio (1 + 1/n)^(-n) * sqrt(2*pi*n/(n+1)) -> e^-1 sqrt(2*pi)
    n = 500
    inst = from_fractions([Fraction(1), Fraction(1)], 0, n, Fraction(2 * n))
    beta = 0.8
    est = z_saddle(inst, beta)
    assert est.z_exact.log == pytest.approx(-beta * n, rel=1e-12)
    expected = (1.0 + 1.0 / n) ** (-n) * math.sqrt(2.0 * math.pi * n / (n + 1))
    assert est.ratio == pytest.approx(expected, rel=1e-7)
    assert abs(est.ratio - math.exp(-1.0) * math.sqrt(2.0 * math.pi)) < 0.01


def test_z_saddle_consistency_random():
    rng = random.Random(53)
    for _ in range(20):
        inst = random_instance(rng, s_max=8, n_max=30)
        beta = rng.uniform(-0.5, 1.0)
        est = z_saddle(inst, beta)
        assert est.nu_star < beta * float(min(inst.mode_weights))
        assert est.ratio > 0.0
        assert est.ratio == pytest.approx(
            math.exp(est.z_exact.log - est.z_saddle.log), rel=1e-12
        )


def test_z_integral_matches_exact():
    inst = from_fractions(
        [Fraction(i) for i in range(1, 7)], 0, 10, Fraction(210)
    )
    beta = 0.3
    nu = saddle_nu(inst, beta)
    zq = z_integral(inst, beta, nu, grid=4096)
    assert zq.log == pytest.approx(z_exact(inst, beta).log, rel=1e-8, abs=1e-8)


def test_z_integral_random_contours():
    # the contour location does not matter as long as it avoids the poles
    rng = random.Random(71)
    for _ in range(10):
        inst = random_instance(rng, s_max=6, n_max=10)
        beta = rng.uniform(-0.5, 1.0)
        pole = min(beta * float(w) for w in inst.mode_weights)
        nu = pole - rng.uniform(0.1, 1.0)
        zq = z_integral(inst, beta, nu, grid=4096)
        assert zq.log == pytest.approx(
            z_exact(inst, beta).log, rel=1e-7, abs=1e-7
        )


def test_z_integral_guards():
    inst = build_example()
    with pytest.raises(InputError):
        z_integral(inst, 0.0, -LN2, grid=32)
    with pytest.raises(DomainError):
        z_integral(inst, 0.0, 0.5, grid=64)


def test_scaled_real_round_trip():
    from bealloc import ScaledReal

    for log_value in (-700.0, -1.0, 0.0, 3.5, 1000.0):
        sr = ScaledReal.from_log(log_value)
        assert 1.0 <= sr.mantissa < math.e + 1e-12
        assert sr.log == pytest.approx(log_value, abs=1e-12)
