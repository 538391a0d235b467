"""Occupancy-statistics share allocation.

Fits a two-multiplier occupancy law to a monotone price schedule under
count and budget constraints, rounds the result to an integer allocation,
and cross-checks the fitted law against the exact configuration ensemble
(enumeration, uniform sampling, and partition-function identities).
"""

from .errors import (
    AllocError,
    BoundsInverted,
    BudgetInfeasible,
    CapExceeded,
    DegenerateBoundary,
    DomainError,
    EmptyPrices,
    IndexRange,
    InputError,
    LowAcceptance,
    NoConvergence,
    NonPositivePrice,
    RepairFailed,
    ScaleMismatch,
    TooFewEnterprises,
)
from .families import from_fractions, unit_price_family, with_total
from .model import (
    DEFAULT_SCALE,
    InvestmentBounds,
    PriceSchedule,
    ProblemInstance,
    TailWeights,
    build_instance,
    energy_range,
    parse_decimal,
    tail_weights,
)
from .oracle import (
    DEFAULT_CAP,
    Composition,
    EnsembleStats,
    SampleResult,
    count_configurations,
    cumulative_stats,
    enumerate_compositions,
    iter_compositions,
    low_energy_shell_weight,
    sample_uniform,
    unconstrained_count,
)
from .partition import (
    GrandPartition,
    PartitionEstimate,
    ScaledReal,
    grand_partition,
    saddle_nu,
    z_exact,
    z_integral,
    z_saddle,
)
from .solver import (
    Allocation,
    ThermoParams,
    build_allocation,
    count_sum,
    energy_sum,
    occupancy,
    predicted_cumulative,
    solve_params,
    solve_sigma,
)

__all__ = [
    "AllocError",
    "Allocation",
    "BoundsInverted",
    "BudgetInfeasible",
    "CapExceeded",
    "Composition",
    "DEFAULT_CAP",
    "DEFAULT_SCALE",
    "DegenerateBoundary",
    "DomainError",
    "EmptyPrices",
    "EnsembleStats",
    "GrandPartition",
    "IndexRange",
    "InputError",
    "InvestmentBounds",
    "LowAcceptance",
    "NoConvergence",
    "NonPositivePrice",
    "PartitionEstimate",
    "PriceSchedule",
    "ProblemInstance",
    "RepairFailed",
    "SampleResult",
    "ScaleMismatch",
    "ScaledReal",
    "TailWeights",
    "ThermoParams",
    "TooFewEnterprises",
    "build_allocation",
    "build_instance",
    "count_configurations",
    "count_sum",
    "cumulative_stats",
    "energy_range",
    "energy_sum",
    "enumerate_compositions",
    "from_fractions",
    "grand_partition",
    "iter_compositions",
    "low_energy_shell_weight",
    "occupancy",
    "parse_decimal",
    "predicted_cumulative",
    "sample_uniform",
    "saddle_nu",
    "solve_params",
    "solve_sigma",
    "tail_weights",
    "unconstrained_count",
    "unit_price_family",
    "with_total",
    "z_exact",
    "z_integral",
    "z_saddle",
]

__version__ = "0.1.0"
