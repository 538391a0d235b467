"""Exact ground truth over the configuration set M.

M is the set of compositions (N_2, ..., N_s) of n units over the modes with
total energy sum(N_j * lambda_j) <= E. Everything here works in scaled
integer arithmetic: energies are exact ints, membership is never decided by
a float. Enumeration walks mode by mode in lexicographic order, pruning any
prefix whose cheapest completion already overshoots the budget. Counting
and ensemble statistics additionally collapse every subtree whose most
expensive completion still fits, replacing the walk below it with closed
stars-and-bars binomials; a memo on (mode, units, remaining budget) makes
repeated subproblems free. Results are exact Python integers throughout.

Modes with degeneracy q > 1 are expanded into q identical columns, matching
the partition-function convention.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional

import numpy as np

from .errors import (
    CapExceeded,
    DegenerateBoundary,
    IndexRange,
    InputError,
    LowAcceptance,
)
from .model import ProblemInstance
from .solver import ThermoParams, predicted_cumulative

DEFAULT_CAP = 10**8
_PILOT_TRIALS = 100_000
_PILOT_RATE = 1e-4
_CHUNK = 20_000


@dataclass(frozen=True)
class Composition:
    """One member of M: increments per mode in priority order."""

    parts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.parts)

    def energy(self, instance: ProblemInstance) -> Fraction:
        lams = _expanded_modes(instance)
        if len(self.parts) != len(lams):
            raise InputError(
                f"composition has {len(self.parts)} parts, instance has "
                f"{len(lams)} modes"
            )
        scaled = sum(p * w for p, w in zip(self.parts, lams))
        return Fraction(scaled, instance.scale)


@dataclass(frozen=True)
class EnsembleStats:
    """Exact ensemble statistics of M at one cumulative index l."""

    total_count: int
    cumulative_mean: tuple[Fraction, ...]
    deviation_fraction: float
    delta: float
    l: int


@dataclass(frozen=True)
class SampleResult:
    """Uniform draws from M with the achieved acceptance rate."""

    compositions: tuple[Composition, ...]
    acceptance_rate: float
    seed: int


def _expanded_modes(instance: ProblemInstance) -> tuple[int, ...]:
    out: list[int] = []
    for w, g in zip(instance.mode_weights_scaled(), instance.degeneracies):
        out.extend([w] * g)
    return tuple(out)


def unconstrained_count(instance: ProblemInstance) -> int:
    """Compositions of n units over the modes, ignoring the budget."""
    m = len(_expanded_modes(instance))
    return math.comb(instance.n + m - 1, m - 1)


def _cap_guard(instance: ProblemInstance, cap: int) -> None:
    bound = unconstrained_count(instance)
    if bound > cap:
        raise CapExceeded(
            f"unconstrained composition count {bound} exceeds cap {cap}"
        )


def iter_compositions(
    instance: ProblemInstance, cap: int = DEFAULT_CAP
) -> Iterator[Composition]:
    """Yield every member of M in lexicographic order of its parts."""
    _cap_guard(instance, cap)
    lams = _expanded_modes(instance)
    budget = instance.effective_budget_scaled()
    n = instance.n
    m = len(lams)
    lmin = lams[-1]
    if n * lmin > budget:
        return
    parts = [0] * m

    def rec(i: int, units: int, left: int) -> Iterator[Composition]:
        # precondition: the cheapest completion fits (units * lmin <= left)
        if i == m - 1:
            parts[i] = units
            yield Composition(tuple(parts))
            parts[i] = 0
            return
        span = lams[i] - lmin
        vmax = units if span == 0 else min(units, (left - units * lmin) // span)
        for v in range(vmax + 1):
            parts[i] = v
            yield from rec(i + 1, units - v, left - v * lams[i])
        parts[i] = 0

    yield from rec(0, n, budget)


def enumerate_compositions(
    instance: ProblemInstance,
    visitor: Callable[[Composition], None],
    cap: int = DEFAULT_CAP,
) -> int:
    """Call visitor on every member of M; return the visit count."""
    visits = 0
    for comp in iter_compositions(instance, cap):
        visitor(comp)
        visits += 1
    return visits


def _count_below(lams: tuple[int, ...], n: int, budget: int) -> int:
    """Exact |{compositions of n over lams with energy <= budget}|."""
    if not lams:
        return 1 if n == 0 else 0
    lmin = lams[-1]
    memo: dict[tuple[int, int, int], int] = {}

    def rec(i: int, units: int, left: int) -> int:
        m = len(lams) - i
        if units * lams[i] <= left:
            return math.comb(units + m - 1, m - 1)
        if units * lmin > left:
            return 0
        key = (i, units, left)
        cached = memo.get(key)
        if cached is not None:
            return cached
        span = lams[i] - lmin  # > 0 here, else one of the cuts above fired
        vmax = min(units, (left - units * lmin) // span)
        total = 0
        for v in range(vmax + 1):
            total += rec(i + 1, units - v, left - v * lams[i])
        memo[key] = total
        return total

    return rec(0, n, budget)


def count_configurations(
    instance: ProblemInstance, cap: int = DEFAULT_CAP
) -> int:
    """|M|, computed independently of the visitor walk."""
    _cap_guard(instance, cap)
    return _count_below(
        _expanded_modes(instance), instance.n, instance.effective_budget_scaled()
    )


def _aggregate(
    lams: tuple[int, ...], n: int, budget: int, lead: int
) -> tuple[int, dict[int, int], list[int]]:
    """One walk over M aggregating |M|, the S_l histogram, per-mode sums.

    lead is the number of leading modes that count into S_l. The histogram
    and per-mode totals returned by each recursive call are relative to the
    subtree, which is what lets the memo reuse them at different prefixes.
    """
    lmin = lams[-1]
    memo: dict[tuple[int, int, int], tuple[int, dict[int, int], list[int]]] = {}

    def rec(i: int, units: int, left: int) -> tuple[int, dict[int, int], list[int]]:
        m = len(lams) - i
        if units * lmin > left:
            return 0, {}, [0] * m
        if units * lams[i] <= left:
            count = math.comb(units + m - 1, m - 1)
            per_mode = math.comb(units + m - 1, m)  # sum of one part over all
            totals = [per_mode] * m
            if i >= lead:
                hist = {0: count}
            else:
                nl = lead - i
                nt = m - nl
                if nt == 0:
                    hist = {units: count}
                else:
                    hist = {
                        a: math.comb(a + nl - 1, nl - 1)
                        * math.comb(units - a + nt - 1, nt - 1)
                        for a in range(units + 1)
                    }
            return count, hist, totals
        key = (i, units, left)
        cached = memo.get(key)
        if cached is not None:
            return cached
        span = lams[i] - lmin
        vmax = min(units, (left - units * lmin) // span)
        count = 0
        hist: dict[int, int] = defaultdict(int)
        totals = [0] * m
        for v in range(vmax + 1):
            c2, h2, t2 = rec(i + 1, units - v, left - v * lams[i])
            count += c2
            offset = v if i < lead else 0
            for a, c in h2.items():
                hist[a + offset] += c
            totals[0] += v * c2
            for t, val in enumerate(t2):
                totals[1 + t] += val
        result = (count, dict(hist), totals)
        memo[key] = result
        return result

    return rec(0, n, budget)


def cumulative_stats(
    instance: ProblemInstance,
    params: ThermoParams,
    l: int,
    epsilon: float = 0.0,
    cap: int = DEFAULT_CAP,
) -> EnsembleStats:
    """Exact S_l = sum(N_2..N_l) statistics over M.

    deviation_fraction is the fraction of M at distance >= delta from the
    occupancy prediction, with band delta = n^(3/4 + epsilon).
    """
    s = instance.size
    if l < 2 or l > s:
        raise IndexRange(f"l = {l} outside 2..{s}")
    _cap_guard(instance, cap)
    lams = _expanded_modes(instance)
    lead = sum(instance.degeneracies[: l - 1])
    total, hist, totals = _aggregate(
        lams, instance.n, instance.effective_budget_scaled(), lead
    )
    if total == 0:
        raise DegenerateBoundary("configuration set is empty")

    center = predicted_cumulative(instance, params, l)
    delta = float(instance.n) ** (0.75 + epsilon) if instance.n else 0.0
    bad = sum(c for a, c in hist.items() if abs(a - center) >= delta)

    # regroup expanded-slot totals by enterprise, then prefix-sum
    means: list[Fraction] = []
    acc = 0
    pos = 0
    for g in instance.degeneracies:
        acc += sum(totals[pos : pos + g])
        pos += g
        means.append(Fraction(acc, total))

    return EnsembleStats(
        total_count=total,
        cumulative_mean=tuple(means),
        deviation_fraction=bad / total,
        delta=delta,
        l=l,
    )


def _iter_energies(
    lams: tuple[int, ...], n: int, budget: int
) -> Iterator[int]:
    """Scaled energies of all compositions of n over lams within budget."""
    lmin = lams[-1]
    if n * lmin > budget:
        return
    m = len(lams)

    def rec(i: int, units: int, left: int, acc: int) -> Iterator[int]:
        if units == 0:
            yield acc
            return
        if i == m - 1:
            yield acc + units * lams[i]
            return
        span = lams[i] - lmin
        vmax = units if span == 0 else min(units, (left - units * lmin) // span)
        for v in range(vmax + 1):
            yield from rec(i + 1, units - v, left - v * lams[i], acc + v * lams[i])

    yield from rec(0, n, budget, 0)


def low_energy_shell_weight(
    instance: ProblemInstance,
    beta: float,
    epsilon: float = 0.25,
    cap: int = DEFAULT_CAP,
) -> float:
    """(1/|M|) * sum of exp(-beta * energy) over the low-energy shell.

    The shell keeps members with energy <= E - n^(1/2 + epsilon). The
    threshold is compared exactly against scaled integer energies.
    """
    _cap_guard(instance, cap)
    lams = _expanded_modes(instance)
    budget = instance.effective_budget_scaled()
    total = _count_below(lams, instance.n, budget)
    if total == 0:
        raise DegenerateBoundary("configuration set is empty")

    offset = float(instance.n) ** (0.5 + epsilon) if instance.n else 0.0
    threshold = instance.effective_budget - Fraction(offset)
    shell_budget = min(math.floor(threshold * instance.scale), budget)
    if shell_budget < 0 or instance.n * lams[-1] > shell_budget:
        return 0.0
    if beta == 0.0:
        return _count_below(lams, instance.n, shell_budget) / total

    scale = float(instance.scale)
    weight = math.fsum(
        math.exp(-beta * (e / scale))
        for e in _iter_energies(lams, instance.n, shell_budget)
    )
    return weight / total


def sample_uniform(
    instance: ProblemInstance, count: int, seed: int = 0
) -> SampleResult:
    """Uniform rejection sampling from M, deterministic per seed.

    Proposals are uniform compositions drawn by the stars-and-bars bijection
    (a uniform (m-1)-subset of n+m-1 slot positions); a proposal is accepted
    iff its exact scaled energy fits the budget. Raises LowAcceptance when
    fewer than 1 in 10^4 proposals survive a 10^5-trial pilot.
    """
    if count < 0:
        raise InputError(f"sample count must be nonnegative, got {count}")
    if count == 0:
        return SampleResult((), 1.0, seed)

    lams = _expanded_modes(instance)
    m = len(lams)
    n = instance.n
    budget = instance.effective_budget_scaled()
    rng = np.random.default_rng(seed)
    lam_vec = np.array(lams, dtype=np.int64)
    exact_fallback = n * max(lams) > 2**62

    accepted: list[tuple[int, ...]] = []
    drawn = 0
    while len(accepted) < count:
        if n == 0:
            parts_mat = np.zeros((_CHUNK, m), dtype=np.int64)
        elif m == 1:
            parts_mat = np.full((_CHUNK, 1), n, dtype=np.int64)
        else:
            slots = n + m - 1
            u = rng.random((_CHUNK, slots))
            bars = np.sort(
                np.argpartition(u, m - 2, axis=1)[:, : m - 1], axis=1
            )
            first = bars[:, :1]
            middle = bars[:, 1:] - bars[:, :-1] - 1
            last = (slots - 1) - bars[:, -1:]
            parts_mat = np.concatenate([first, middle, last], axis=1)
        if exact_fallback:
            ok = np.array(
                [
                    sum(int(p) * w for p, w in zip(row, lams)) <= budget
                    for row in parts_mat
                ]
            )
        else:
            ok = parts_mat @ lam_vec <= budget
        drawn += _CHUNK
        for row in parts_mat[ok]:
            accepted.append(tuple(int(x) for x in row))
        if drawn >= _PILOT_TRIALS and len(accepted) < count:
            if len(accepted) / drawn < _PILOT_RATE:
                raise LowAcceptance(
                    f"acceptance rate {len(accepted) / drawn:.2e} below "
                    f"{_PILOT_RATE} after {drawn} trials"
                )

    rate = len(accepted) / drawn
    comps = tuple(Composition(p) for p in accepted[:count])
    return SampleResult(comps, rate, seed)
