"""Occupancy solver: fit (beta, sigma) so the mode occupancies

    n_j = 1 / (exp(beta*lambda_j - sigma) - 1),   j = 2..s,

meet the two constraints sum_j q_j*n_j = N (units placed) and
sum_j q_j*lambda_j*n_j = E (effective budget spent). Both sums are strictly
monotone: increasing in sigma at fixed beta, and the energy matched at the
count-consistent sigma(beta) is strictly decreasing in beta. That makes a
nested bisection exact enough and unconditionally stable: an inner solve for
sigma at each trial beta, an outer solve for beta on the energy residual.
beta may be negative (budgets above the uniform mean); at beta = 0 the inner
solve has the closed form sigma = -log(1 + Q/N) with Q = sum_j q_j.

Rounded integer increments come from largest-remainder apportionment with a
greedy budget repair that shifts single units toward cheaper modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DegenerateBoundary,
    DomainError,
    IndexRange,
    NoConvergence,
    RepairFailed,
)
from .model import ProblemInstance, energy_range

MAX_ITERATIONS = 200
SPEC_TOL = 1e-9        # contract tolerance, relative to max(1, target)
TARGET_TOL = 1e-12     # internal goal before falling back to SPEC_TOL
MAX_BRACKET = float(2**60)


@dataclass(frozen=True)
class ThermoParams:
    """Solved multipliers with the residuals actually achieved."""

    beta: float
    sigma: float
    residual_n: float
    residual_e: float


@dataclass(frozen=True)
class Allocation:
    """Integer share counts with their occupancy provenance.

    occupancies are the real mode occupancies n_2..n_s; counts are the
    monotone share counts C_1..C_s after rounding and repair. spend and
    budget_residual are exact rationals; rounding_shift counts the units the
    budget repair moved.
    """

    occupancies: tuple[float, ...]
    counts: tuple[int, ...]
    spend: Fraction
    budget_residual: Fraction
    rounding_shift: int


def occupancy(beta: float, sigma: float, lam: float) -> float:
    """Single-mode occupancy 1/(exp(beta*lam - sigma) - 1).

    Requires beta*lam - sigma > 0; the form exp(-x)/(1 - exp(-x)) is stable
    for both tiny and huge arguments.
    """
    x = beta * lam - sigma
    if x <= 0:
        raise DomainError(
            f"occupancy argument beta*lam - sigma = {x} must be positive"
        )
    w = math.exp(-x)
    return w / -math.expm1(-x)


def _mode_arrays(instance: ProblemInstance) -> tuple[np.ndarray, np.ndarray]:
    lam = np.array([float(v) for v in instance.mode_weights])
    q = np.array([float(g) for g in instance.degeneracies])
    return lam, q


def _sums(
    lam: np.ndarray, q: np.ndarray, beta: float, sigma: float
) -> tuple[float, float]:
    """Count and energy sums over all modes at (beta, sigma)."""
    x = beta * lam - sigma
    if x.min() <= 0:
        raise DomainError(
            f"sigma = {sigma} is not below the pole at {float((beta * lam).min())}"
        )
    w = np.exp(-x)
    occ = w / -np.expm1(-x)
    return float(q @ occ), float(q @ (lam * occ))


def count_sum(instance: ProblemInstance, beta: float, sigma: float) -> float:
    """sum_j q_j * n_j over modes 2..s."""
    lam, q = _mode_arrays(instance)
    return _sums(lam, q, beta, sigma)[0]


def energy_sum(instance: ProblemInstance, beta: float, sigma: float) -> float:
    """sum_j q_j * lambda_j * n_j over modes 2..s."""
    lam, q = _mode_arrays(instance)
    return _sums(lam, q, beta, sigma)[1]


def _solve_sigma_arrays(
    lam: np.ndarray, q: np.ndarray, n: int, beta: float
) -> tuple[float, float, float]:
    """Inner solve: sigma with count_sum = n at fixed beta.

    Returns (sigma, count residual, energy at sigma). The count sum rises
    strictly from 0 to infinity as sigma approaches the pole
    min_j beta*lambda_j from below, so bracket expansion cannot fail.
    """
    pole = float((beta * lam).min())
    spec = SPEC_TOL * max(1.0, float(n))
    target = TARGET_TOL * max(1.0, float(n))

    delta = 1.0
    c_hi, e_hi = _sums(lam, q, beta, pole - delta)
    guard = 0
    while c_hi < n:
        delta *= 0.5
        c_hi, e_hi = _sums(lam, q, beta, pole - delta)
        guard += 1
        if guard > MAX_ITERATIONS:
            raise NoConvergence("sigma upper bracket expansion stalled")
    offset = delta
    c_lo, e_lo = c_hi, e_hi
    while c_lo > n:
        offset *= 2.0
        if offset > MAX_BRACKET:
            raise NoConvergence("sigma lower bracket exceeded 2^60")
        c_lo, e_lo = _sums(lam, q, beta, pole - offset)

    lo, hi = pole - offset, pole - delta
    best = (abs(c_lo - n), pole - offset, c_lo - n, e_lo)
    if abs(c_hi - n) < best[0]:
        best = (abs(c_hi - n), pole - delta, c_hi - n, e_hi)
    if best[0] <= target:
        return best[1], best[2], best[3]

    for _ in range(MAX_ITERATIONS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # no representable midpoint left
        c, e = _sums(lam, q, beta, mid)
        r = c - n
        if abs(r) < best[0]:
            best = (abs(r), mid, r, e)
        if abs(r) <= target:
            return mid, r, e
        if c < n:
            lo = mid
        else:
            hi = mid
    if best[0] <= spec:
        return best[1], best[2], best[3]
    raise NoConvergence(
        f"sigma bisection residual {best[2]:.3e} above tolerance {spec:.3e}"
    )


def solve_sigma(instance: ProblemInstance, beta: float) -> float:
    """Solve count_sum(beta, sigma) = n for sigma at fixed beta."""
    if instance.n == 0:
        raise DegenerateBoundary("sigma solve needs at least one increment")
    lam, q = _mode_arrays(instance)
    sigma, _, _ = _solve_sigma_arrays(lam, q, instance.n, beta)
    return sigma


def solve_params(instance: ProblemInstance) -> ThermoParams:
    """Outer solve: (beta, sigma) meeting both count and energy constraints.

    Requires E strictly inside the attainable energy range; boundary or
    empty instances raise DegenerateBoundary (callers should fall back to a
    boundary allocation with all increments at one mode).
    """
    if instance.n == 0:
        raise DegenerateBoundary("no increments to place (K = M)")
    low, high = energy_range(instance)
    e_exact = instance.effective_budget
    if not (low < e_exact < high):
        raise DegenerateBoundary(
            f"effective budget {e_exact} not strictly inside the attainable "
            f"energy range ({low}, {high}); no interior solution exists"
        )

    lam, q = _mode_arrays(instance)
    n = instance.n
    e_target = float(e_exact)
    spec = SPEC_TOL * max(1.0, abs(e_target))
    target = TARGET_TOL * max(1.0, abs(e_target))

    def evaluate(beta: float) -> tuple[float, float, float]:
        sigma, rn, energy = _solve_sigma_arrays(lam, q, n, beta)
        return sigma, rn, energy - e_target

    # beta = 0 admits a closed-form sigma; also the starting point for the
    # bracket because the energy gap's sign picks the search direction.
    sigma0 = -math.log1p(float(q.sum()) / n)
    c0, e0 = _sums(lam, q, 0.0, sigma0)
    g0 = e0 - e_target
    if abs(g0) <= target:
        return ThermoParams(0.0, sigma0, c0 - n, g0)

    if g0 > 0:  # energy too high at beta = 0: need beta > 0
        lo, g_lo, lo_state = 0.0, g0, (sigma0, c0 - n)
        hi = 1.0
        sigma_hi, rn_hi, g_hi = evaluate(hi)
        while g_hi > 0:
            lo, g_lo, lo_state = hi, g_hi, (sigma_hi, rn_hi)
            hi *= 2.0
            if hi > MAX_BRACKET:
                raise NoConvergence("beta upper bracket exceeded 2^60")
            sigma_hi, rn_hi, g_hi = evaluate(hi)
        hi_state = (sigma_hi, rn_hi)
    else:  # energy too low: need beta < 0
        hi, g_hi, hi_state = 0.0, g0, (sigma0, c0 - n)
        lo = -1.0
        sigma_lo, rn_lo, g_lo = evaluate(lo)
        while g_lo < 0:
            hi, g_hi, hi_state = lo, g_lo, (sigma_lo, rn_lo)
            lo *= 2.0
            if lo < -MAX_BRACKET:
                raise NoConvergence("beta lower bracket exceeded -2^60")
            sigma_lo, rn_lo, g_lo = evaluate(lo)
        lo_state = (sigma_lo, rn_lo)

    # g(lo) > 0 > g(hi), g strictly decreasing in beta.
    best = (abs(g_lo), lo, lo_state[0], lo_state[1], g_lo)
    if abs(g_hi) < best[0]:
        best = (abs(g_hi), hi, hi_state[0], hi_state[1], g_hi)
    if best[0] <= target:
        return ThermoParams(best[1], best[2], best[3], best[4])

    for _ in range(MAX_ITERATIONS):
        mid = 0.5 * (lo + hi)
        if mid <= min(lo, hi) or mid >= max(lo, hi):
            break
        sigma_m, rn_m, g_m = evaluate(mid)
        if abs(g_m) < best[0]:
            best = (abs(g_m), mid, sigma_m, rn_m, g_m)
        if abs(g_m) <= target:
            return ThermoParams(mid, sigma_m, rn_m, g_m)
        if g_m > 0:
            lo = mid
        else:
            hi = mid
    if best[0] <= spec:
        return ThermoParams(best[1], best[2], best[3], best[4])
    raise NoConvergence(
        f"beta bisection residual {best[4]:.3e} above tolerance {spec:.3e}"
    )


def predicted_cumulative(
    instance: ProblemInstance, params: ThermoParams, l: int
) -> float:
    """Occupancy prediction for the cumulative increment sum over modes 2..l."""
    if l < 2 or l > instance.size:
        raise IndexRange(f"l = {l} outside 2..{instance.size}")
    total = 0.0
    for j in range(l - 1):
        total += instance.degeneracies[j] * occupancy(
            params.beta, params.sigma, float(instance.mode_weights[j])
        )
    return total


def build_allocation(
    instance: ProblemInstance, params: ThermoParams
) -> Allocation:
    """Round occupancies to integer counts and repair any budget overshoot.

    Largest-remainder apportionment: floor every occupancy, then hand the
    missing units to the largest fractional parts (ties toward the larger
    mode index, i.e. the cheaper tail). If rounding overspends, single units
    move from the smallest over-occupied mode toward its cheaper neighbour
    until spending fits; each move lowers spending by exactly one price.
    """
    s = instance.size
    k = instance.bounds.min_shares
    phi = instance.bounds.budget
    lam1 = instance.weights.values[0]
    if instance.n == 0:
        spend = k * lam1
        return Allocation(
            occupancies=(0.0,) * (s - 1),
            counts=(k,) * s,
            spend=spend,
            budget_residual=phi - spend,
            rounding_shift=0,
        )

    occ = [
        g * occupancy(params.beta, params.sigma, float(w))
        for w, g in zip(instance.mode_weights, instance.degeneracies)
    ]
    m = len(occ)
    parts = [math.floor(v) for v in occ]
    missing = instance.n - sum(parts)
    if missing < 0 or missing > m:
        raise RepairFailed(
            f"occupancies sum to {sum(occ):.6f}, cannot apportion {instance.n}"
        )
    order = sorted(range(m), key=lambda j: (parts[j] - occ[j], -j))
    for j in order[:missing]:
        parts[j] += 1

    lam_scaled = instance.mode_weights_scaled()
    prices_scaled = instance.schedule.scaled()
    scale = instance.scale
    phi_scaled = phi * scale
    if phi_scaled.denominator != 1:
        raise RepairFailed(f"budget {phi} not representable at scale {scale}")
    phi_scaled = int(phi_scaled)
    lam1_scaled = int(lam1 * scale)

    spend_scaled = k * lam1_scaled + sum(
        p * w for p, w in zip(parts, lam_scaled)
    )
    shift = 0
    while spend_scaled > phi_scaled:
        movable = next((j for j in range(m - 1) if parts[j] >= 1), None)
        if movable is None:
            raise RepairFailed(
                "all increments already at the cheapest mode but spending "
                f"{Fraction(spend_scaled, scale)} still exceeds {phi}"
            )
        parts[movable] -= 1
        parts[movable + 1] += 1
        # parts[j] belongs to enterprise j+2; the move saves its price
        spend_scaled -= prices_scaled[movable + 1]
        shift += 1

    counts = [k]
    for p in parts:
        counts.append(counts[-1] + p)
    assert counts[-1] == instance.bounds.max_shares
    spend = Fraction(spend_scaled, scale)
    return Allocation(
        occupancies=tuple(occ),
        counts=tuple(counts),
        spend=spend,
        budget_residual=phi - spend,
        rounding_shift=shift,
    )
