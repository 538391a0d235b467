"""Reference instance families used by the verification suites and CLI."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .model import (
    DEFAULT_SCALE,
    InvestmentBounds,
    PriceSchedule,
    ProblemInstance,
    TailWeights,
)


def from_fractions(
    prices: Sequence[Fraction],
    min_shares: int,
    max_shares: int,
    budget: Fraction,
    scale: int = DEFAULT_SCALE,
) -> ProblemInstance:
    """Assemble a validated instance directly from exact rationals."""
    schedule = PriceSchedule(tuple(Fraction(p) for p in prices), scale)
    bounds = InvestmentBounds(min_shares, max_shares, Fraction(budget))
    weights = TailWeights.from_schedule(schedule)
    effective = bounds.budget - bounds.min_shares * weights.values[0]
    return ProblemInstance(
        schedule=schedule,
        bounds=bounds,
        weights=weights,
        n=bounds.span,
        effective_budget=effective,
    )


def unit_price_family(
    n: int, budget: str = "mean", scale: int = DEFAULT_SCALE
) -> ProblemInstance:
    """The scaled trend family: s = n enterprises at unit price, K = 0, M = n.

    budget="mean" pins the effective budget at the uniform (beta = 0) mean
    energy n^2/2; budget="slack" lifts it to the upper feasibility bound so
    the energy cut never binds.
    """
    if n < 2:
        raise ValueError(f"family needs n >= 2, got {n}")
    prices = [Fraction(1)] * n
    if budget == "mean":
        phi = Fraction(n * n, 2)
    elif budget == "slack":
        phi = Fraction(n * n)
    else:
        raise ValueError(f"unknown budget placement {budget!r}")
    return from_fractions(prices, 0, n, phi, scale)


def with_total(instance: ProblemInstance, n: int) -> ProblemInstance:
    """Copy an instance with n increments and a slack budget.

    Used by the partition doubling schedule, where only the mode weights and
    the unit total matter.
    """
    k = instance.bounds.min_shares
    lam1 = instance.weights.values[0]
    return from_fractions(
        instance.schedule.prices,
        k,
        k + n,
        (k + n) * lam1,
        instance.scale,
    )
