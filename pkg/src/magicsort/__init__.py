"""In-memory sorting on memristive crossbars: a cycle-accurate simulator and
schedule compiler for stateful-NOR (MAGIC) compare-and-swap units, bitonic
sorting networks and 3x3 median filtering, with latency/energy/area
accounting against bundled reference tables."""

__version__ = "0.1.0"

from .core import (
    HRS,
    LRS,
    Crossbar,
    Cycle,
    MagicSortError,
    MicroOp,
    OpCounts,
    OpKind,
    Schedule,
    execute_schedule,
    execute_schedule_batch,
    nor_eval,
    schedule_from_json,
    schedule_to_json,
    validate_schedule,
)
from .binary import CasConfig, CasUnit, build_cas, build_comparator, build_mux_pair
from .unary import (
    UnaryBitStream,
    UnaryCasUnit,
    build_unary_cas,
    encode_unary,
    gate_min_max,
)
from .networks import (
    BinaryMode,
    BitonicNetwork,
    MedianPlan,
    SortPlan,
    UnaryMode,
    build_bitonic,
    build_median_plan,
    map_to_partitions,
    simulate_median,
    simulate_network,
    simulate_plan,
)
from .costs import (
    ClockConfig,
    CostReport,
    EnergyTable,
    compare_to_reference,
    estimate,
)

__all__ = [
    "HRS", "LRS", "Crossbar", "Cycle", "MagicSortError", "MicroOp",
    "OpCounts", "OpKind", "Schedule", "execute_schedule",
    "execute_schedule_batch", "nor_eval", "schedule_from_json",
    "schedule_to_json", "validate_schedule",
    "CasConfig", "CasUnit", "build_cas", "build_comparator", "build_mux_pair",
    "UnaryBitStream", "UnaryCasUnit", "build_unary_cas", "encode_unary",
    "gate_min_max",
    "BinaryMode", "BitonicNetwork", "MedianPlan", "SortPlan", "UnaryMode",
    "build_bitonic", "build_median_plan", "map_to_partitions",
    "simulate_median", "simulate_network", "simulate_plan",
    "ClockConfig", "CostReport", "EnergyTable", "compare_to_reference", "estimate",
]
