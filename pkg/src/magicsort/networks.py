"""Bitonic sorting networks, partition-mapped execution plans, and the
3x3 median-selection plan.

A network of N inputs is mapped onto N/2 crossbar partitions, one
compare-and-swap unit per partition.  Every stage of the network becomes one
step of the plan; all partitions run their unit in parallel within a step,
and operands that live in the wrong partition are delivered by two-cycle
copy operations before the step.  Cycle accounting per plan:

    total = steps x (1 + unit operation cycles) + 2 x copies

where the per-step "+1" is the bulk re-initialization cycle that arms the
working cells of every partition (for the binary unit this is its leading
init cycle; for the unary unit it arms the preset working columns).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .binary import CasUnit, UnsupportedWidthError, build_cas
from .core import MagicSortError, OpCounts, execute_schedule_batch
from .unary import UnaryCasUnit, build_unary_cas


class NetworkError(MagicSortError):
    pass


class ModeRangeError(MagicSortError):
    pass


# ---------------------------------------------------------------------------
# Network generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparePair:
    """Wires i < j; ascending means wire i receives the minimum."""

    i: int
    j: int
    ascending: bool


@dataclass(frozen=True)
class BitonicNetwork:
    n_inputs: int
    stages: tuple[tuple[ComparePair, ...], ...]

    @property
    def cas_total(self) -> int:
        return sum(len(s) for s in self.stages)

    @property
    def stage_count(self) -> int:
        return len(self.stages)


def build_bitonic(n_inputs: int, *, descending: bool = False) -> BitonicNetwork:
    """Standard bitonic network; output is sorted ascending unless flipped."""
    N = n_inputs
    if N < 2 or N & (N - 1):
        raise NetworkError(f"input count must be a power of two >= 2, got {N}")
    stages: list[tuple[ComparePair, ...]] = []
    k = 2
    while k <= N:
        j = k // 2
        while j >= 1:
            pairs = []
            for i in range(N):
                partner = i ^ j
                if partner > i:
                    asc = (i & k) == 0
                    if descending:
                        asc = not asc
                    pairs.append(ComparePair(i, partner, asc))
            stages.append(tuple(pairs))
            j //= 2
        k *= 2
    net = BitonicNetwork(N, tuple(stages))
    log2 = N.bit_length() - 1
    assert net.cas_total == N * log2 * (log2 + 1) // 4
    assert all(len(s) == N // 2 for s in net.stages)
    return net


def simulate_network(net: BitonicNetwork, values) -> list:
    """Wire-level reference simulation with ideal min/max comparators."""
    if len(values) != net.n_inputs:
        raise NetworkError(
            f"expected {net.n_inputs} values, got {len(values)}")
    wires = list(values)
    for stage in net.stages:
        for p in stage:
            lo, hi = min(wires[p.i], wires[p.j]), max(wires[p.i], wires[p.j])
            wires[p.i], wires[p.j] = (lo, hi) if p.ascending else (hi, lo)
    return wires


def simulate_network_batch(net: BitonicNetwork, values: np.ndarray) -> np.ndarray:
    """Vectorized wire-level simulation over a batch of input vectors."""
    wires = np.array(values, copy=True)
    for stage in net.stages:
        for p in stage:
            a, b = wires[..., p.i].copy(), wires[..., p.j].copy()
            lo, hi = np.minimum(a, b), np.maximum(a, b)
            if p.ascending:
                wires[..., p.i], wires[..., p.j] = lo, hi
            else:
                wires[..., p.i], wires[..., p.j] = hi, lo
    return wires


# ---------------------------------------------------------------------------
# Execution modes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinaryMode:
    n: int

    label = "binary"

    def build_unit(self) -> CasUnit:
        return build_cas(self.n)

    @property
    def value_limit(self) -> int:
        return 1 << self.n

    @property
    def rows(self) -> int:
        return self.n


@dataclass(frozen=True)
class UnaryMode:
    length: int

    label = "unary"

    def build_unit(self) -> UnaryCasUnit:
        return build_unary_cas(self.length)

    @property
    def value_limit(self) -> int:
        return self.length + 1

    @property
    def rows(self) -> int:
        return self.length


Mode = Union[BinaryMode, UnaryMode]


def _check_values(mode: Mode, values) -> None:
    limit = mode.value_limit
    for v in values:
        if not 0 <= v < limit:
            raise ModeRangeError(
                f"value {v} out of range for {mode.label} mode "
                f"(limit {limit - 1})")


# ---------------------------------------------------------------------------
# Partitioned plans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CopyMove:
    """Deliver the current value of `slot` from one partition to another
    before the step runs (one two-cycle copy of a whole word/stream)."""

    slot: int
    src: int
    dst: int


@dataclass(frozen=True)
class PlannedCas:
    """Run one unit in `partition`; slot `a` receives the minimum when
    ascending, the maximum otherwise."""

    partition: int
    a: int
    b: int
    ascending: bool = True


@dataclass(frozen=True)
class PlanStep:
    copies: tuple[CopyMove, ...]
    cas: tuple[PlannedCas, ...]


@dataclass
class CycleAccount:
    steps: int
    unit_op_cycles: int
    copy_total: int
    notes: list[str] = field(default_factory=list)

    @property
    def per_step_cycles(self) -> int:
        return 1 + self.unit_op_cycles

    @property
    def copy_cycles(self) -> int:
        return 2 * self.copy_total

    @property
    def total(self) -> int:
        return self.steps * self.per_step_cycles + self.copy_cycles

    def as_dict(self) -> dict:
        return {
            "steps": self.steps,
            "unit_op_cycles": self.unit_op_cycles,
            "per_step_init_cycles": 1,
            "copy_total": self.copy_total,
            "copy_cycles": self.copy_cycles,
            "total": self.total,
            "notes": list(self.notes),
        }


@dataclass
class SortPlan:
    mode: Mode
    n_inputs: int
    partitions: int
    steps: tuple[PlanStep, ...]
    copy_total: int
    cycle_account: CycleAccount
    rows: int
    unit_cols: int
    final_home: dict[int, int]   # wire/slot -> partition after the last step

    @property
    def cols(self) -> int:
        return self.partitions * self.unit_cols

    @property
    def dimension(self) -> tuple[int, int]:
        return (self.rows, self.cols)


def map_to_partitions(net: BitonicNetwork, mode: Mode) -> SortPlan:
    """Assign each stage's comparisons to partitions and insert the copy
    moves that make every operand partition-local.

    Hosting rule: every partition holds the two outputs of the unit it ran
    in the previous step; each stage's pairs form a 2-regular multigraph
    over partitions, so walking its cycles yields an assignment with exactly
    one unit per partition, and the operand that is not already resident is
    copied in (the locally needed value stays).
    """
    N = net.n_inputs
    parts = N // 2
    unit = mode.build_unit()
    holder = {w: w // 2 for w in range(N)}
    steps: list[PlanStep] = []
    copy_total = 0
    for stage in net.stages:
        # multigraph: partition -> incident pair indices
        incident: dict[int, list[int]] = {p: [] for p in range(parts)}
        for idx, pair in enumerate(stage):
            incident[holder[pair.i]].append(idx)
            incident[holder[pair.j]].append(idx)
        host: dict[int, int] = {}
        for start in range(len(stage)):
            if start in host:
                continue
            edge, node = start, holder[stage[start].i]
            while edge not in host:
                host[edge] = node
                pair = stage[edge]
                ends = (holder[pair.i], holder[pair.j])
                node = ends[1] if ends[0] == node else ends[0]
                nxt = [e for e in incident[node] if e != edge]
                if not nxt:
                    break
                edge = nxt[0]
        copies = []
        for idx, pair in enumerate(stage):
            p = host[idx]
            for wire in (pair.i, pair.j):
                if holder[wire] != p:
                    copies.append(CopyMove(wire, holder[wire], p))
        cas = tuple(
            PlannedCas(host[idx], pair.i, pair.j, pair.ascending)
            for idx, pair in enumerate(stage))
        for idx, pair in enumerate(stage):
            holder[pair.i] = holder[pair.j] = host[idx]
        copy_total += len(copies)
        steps.append(PlanStep(tuple(copies), cas))
    S = net.stage_count
    account = CycleAccount(steps=S, unit_op_cycles=unit.processing_cycles,
                           copy_total=copy_total)
    expected_copies = N * (S - 1) // 2
    if copy_total != expected_copies:
        account.notes.append(
            f"routed copies {copy_total} differ from the closed form "
            f"{expected_copies}")
    plan = SortPlan(
        mode=mode,
        n_inputs=N,
        partitions=parts,
        steps=tuple(steps),
        copy_total=copy_total,
        cycle_account=account,
        rows=mode.rows,
        unit_cols=unit.schedule.cols,
        final_home=dict(holder),
    )
    return plan


# ---------------------------------------------------------------------------
# Plan execution
# ---------------------------------------------------------------------------

def _run_step_cas(unit, mode: Mode, values: dict[int, int],
                  cas_list) -> None:
    """Execute the step's units through the crossbar executor, one partition
    per batch lane, and write the min/max back to the value slots."""
    k = len(cas_list)
    if k == 0:
        return
    rows, cols = unit.schedule.rows, unit.schedule.cols
    batch = np.zeros((k, rows, cols), dtype=np.uint8)
    if isinstance(mode, BinaryMode):
        n = mode.n
        shifts = n - 1 - np.arange(n)
        for lane, pc in enumerate(cas_list):
            batch[lane, :, unit.placement.a_col] = (values[pc.a] >> shifts) & 1
            batch[lane, :, unit.placement.b_col] = (values[pc.b] >> shifts) & 1
    else:
        idx = np.arange(mode.length)
        for lane, pc in enumerate(cas_list):
            batch[lane, :, unit.placement.a_col] = idx < values[pc.a]
            batch[lane, :, unit.placement.b_col] = idx < values[pc.b]
        for (r, c) in unit.schedule.preset:
            batch[:, r, c] = 1
    out, _ = execute_schedule_batch(unit.schedule, batch, check=False)
    if isinstance(mode, BinaryMode):
        weights = 1 << (mode.n - 1 - np.arange(mode.n))
        hi = (out[:, :, unit.placement.max_col] * weights).sum(axis=1)
        lo = (out[:, :, unit.placement.min_col] * weights).sum(axis=1)
    else:
        lo = out[:, :, unit.placement.min_col].sum(axis=1)
        hi = out[:, :, unit.placement.max_col].sum(axis=1)
    for lane, pc in enumerate(cas_list):
        if pc.ascending:
            values[pc.a], values[pc.b] = int(lo[lane]), int(hi[lane])
        else:
            values[pc.a], values[pc.b] = int(hi[lane]), int(lo[lane])


@dataclass
class PlanTrace:
    cycles: int
    events: OpCounts
    cas_executions: int
    copies_routed: int


def _plan_events(unit, mode: Mode, cas_executions: int,
                 copies_routed: int) -> OpCounts:
    per_exec = unit.event_counts()
    events = per_exec.scaled(cas_executions)
    events.copies += copies_routed * mode.rows
    events.cycles = 0  # cycle accounting lives in CycleAccount
    return events


def simulate_plan(plan: SortPlan, inputs) -> tuple[list[int], PlanTrace]:
    """Execute the plan on one input vector.

    Every step runs its units through the crossbar executor (all partitions
    in parallel) after applying the step's copy moves; step k+1 never starts
    before step k completes.  Returns the values read back in wire order,
    which equals the ascending sort of the inputs, plus the aggregate trace.
    The trace's cycle count equals the plan's cycle account by construction.
    """
    if len(inputs) != plan.n_inputs:
        raise NetworkError(
            f"expected {plan.n_inputs} values, got {len(inputs)}")
    _check_values(plan.mode, inputs)
    unit = plan.mode.build_unit()
    values = {w: int(v) for w, v in enumerate(inputs)}
    for step in plan.steps:
        _run_step_cas(unit, plan.mode, values, step.cas)
    cas_total = sum(len(s.cas) for s in plan.steps)
    trace = PlanTrace(
        cycles=plan.cycle_account.total,
        events=_plan_events(unit, plan.mode, cas_total, plan.copy_total),
        cas_executions=cas_total,
        copies_routed=plan.copy_total,
    )
    return [values[w] for w in range(plan.n_inputs)], trace


# ---------------------------------------------------------------------------
# 3x3 median selection
# ---------------------------------------------------------------------------

# Copy budgets charged by the published accounting; the routed schedule below
# moves more words than this, so the divergence is noted on the account.
MEDIAN_COPY_BUDGET = {"binary": 16, "unary": 12}
MEDIAN_PARTITIONS = 5
MEDIAN_STEPS_TOTAL = 8

_A, _B, _C, _D, _E = range(5)

# Eight steps over five partitions computing the median of nine values:
# three row sort-3s, then max of the row minima, median of the row middles,
# min of the row maxima, and a final 3-way median.  Every host partition
# holds exactly its two operands when its unit fires, and no partition ever
# holds more than two live values.
_MEDIAN_PROGRAM: tuple[tuple[tuple[tuple[int, int, int], ...],
                             tuple[tuple[int, int, int], ...]], ...] = (
    (((7, _D, _E),),
     ((_A, 0, 1), (_C, 4, 5), (_E, 7, 8))),
    (((1, _A, _B), (5, _C, _A), (3, _B, _C), (7, _E, _D)),
     ((_B, 1, 2), (_C, 3, 4), (_D, 6, 7))),
    (((2, _B, _D), (0, _A, _B), (3, _C, _A), (5, _A, _C), (7, _D, _E)),
     ((_B, 0, 1), (_C, 4, 5), (_E, 7, 8))),
    (((0, _B, _A), (4, _C, _E), (8, _E, _C)),
     ((_A, 0, 3), (_C, 5, 8), (_E, 4, 7))),
    (((3, _A, _D), (2, _D, _C), (1, _B, _E), (7, _E, _B)),
     ((_D, 3, 6), (_C, 5, 2), (_E, 1, 4))),
    (((7, _B, _E), (6, _D, _C)),
     ((_E, 4, 7), (_C, 6, 5))),
    (((5, _C, _E),),
     ((_E, 5, 4),)),
    (((6, _C, _E),),
     ((_E, 6, 5),)),
)

MEDIAN_OUTPUT_SLOT = 5
MEDIAN_OUTPUT_PARTITION = _E


@dataclass
class MedianPlan:
    mode: Mode
    partitions: int
    steps: tuple[PlanStep, ...]
    copy_budget: int
    copies_routed: int
    cycle_account: CycleAccount
    rows: int
    unit_cols: int
    output_slot: int = MEDIAN_OUTPUT_SLOT
    output_partition: int = MEDIAN_OUTPUT_PARTITION

    @property
    def cols(self) -> int:
        return self.partitions * self.unit_cols

    @property
    def dimension(self) -> tuple[int, int]:
        return (self.rows, self.cols)


def build_median_plan(mode: Mode, copy_budget: int | None = None) -> MedianPlan:
    """Median-of-9 selection plan: 5 partitions, 8 steps, 19 unit runs.

    Fewer units than a full 9-input sort since only the median is kept.
    `copy_budget` is the copy count charged by the cycle accounting; it
    defaults per mode to the published totals.
    """
    if isinstance(mode, BinaryMode) and mode.n < 3:
        raise UnsupportedWidthError(
            "median plan needs a data width of at least 3")
    unit = mode.build_unit()
    steps = tuple(
        PlanStep(
            tuple(CopyMove(*c) for c in copies),
            tuple(PlannedCas(p, a, b, True) for (p, a, b) in cas))
        for copies, cas in _MEDIAN_PROGRAM)
    routed = sum(len(s.copies) for s in steps)
    if copy_budget is None:
        copy_budget = MEDIAN_COPY_BUDGET[mode.label]
    account = CycleAccount(steps=MEDIAN_STEPS_TOTAL,
                           unit_op_cycles=unit.processing_cycles,
                           copy_total=copy_budget)
    if routed != copy_budget:
        account.notes.append(
            f"charged copy budget {copy_budget}; routed copy moves {routed}")
    return MedianPlan(
        mode=mode,
        partitions=MEDIAN_PARTITIONS,
        steps=steps,
        copy_budget=copy_budget,
        copies_routed=routed,
        cycle_account=account,
        rows=mode.rows,
        unit_cols=unit.schedule.cols,
    )


def simulate_median(plan: MedianPlan, window) -> tuple[int, PlanTrace]:
    """Run the median plan on nine values; returns the median and trace."""
    if len(window) != 9:
        raise NetworkError(f"median window needs 9 values, got {len(window)}")
    _check_values(plan.mode, window)
    unit = plan.mode.build_unit()
    values = {s: int(v) for s, v in enumerate(window)}
    for step in plan.steps:
        _run_step_cas(unit, plan.mode, values, step.cas)
    cas_total = sum(len(s.cas) for s in plan.steps)
    trace = PlanTrace(
        cycles=plan.cycle_account.total,
        events=_plan_events(unit, plan.mode, cas_total, plan.copies_routed),
        cas_executions=cas_total,
        copies_routed=plan.copies_routed,
    )
    return values[plan.output_slot], trace


def _run_step_cas_batch(unit, mode: Mode, values: np.ndarray,
                        cas_list) -> None:
    """Vectorized variant of `_run_step_cas`: `values` has shape
    (batch, slots); all batch lanes of all partitions execute in one call."""
    k = len(cas_list)
    if k == 0:
        return
    V = values.shape[0]
    rows, cols = unit.schedule.rows, unit.schedule.cols
    batch = np.zeros((V, k, rows, cols), dtype=np.uint8)
    a_ops = np.stack([values[:, pc.a] for pc in cas_list], axis=1)
    b_ops = np.stack([values[:, pc.b] for pc in cas_list], axis=1)
    if isinstance(mode, BinaryMode):
        shifts = mode.n - 1 - np.arange(mode.n)
        batch[..., unit.placement.a_col] = (a_ops[..., None] >> shifts) & 1
        batch[..., unit.placement.b_col] = (b_ops[..., None] >> shifts) & 1
    else:
        idx = np.arange(mode.length)
        batch[..., unit.placement.a_col] = idx < a_ops[..., None]
        batch[..., unit.placement.b_col] = idx < b_ops[..., None]
        for (r, c) in unit.schedule.preset:
            batch[:, :, r, c] = 1
    out, _ = execute_schedule_batch(unit.schedule, batch, check=False)
    if isinstance(mode, BinaryMode):
        weights = 1 << (mode.n - 1 - np.arange(mode.n))
        hi = (out[..., unit.placement.max_col] * weights).sum(axis=-1)
        lo = (out[..., unit.placement.min_col] * weights).sum(axis=-1)
    else:
        lo = out[..., unit.placement.min_col].sum(axis=-1)
        hi = out[..., unit.placement.max_col].sum(axis=-1)
    for lane, pc in enumerate(cas_list):
        if pc.ascending:
            values[:, pc.a], values[:, pc.b] = lo[:, lane], hi[:, lane]
        else:
            values[:, pc.a], values[:, pc.b] = hi[:, lane], lo[:, lane]


def simulate_plan_batch(plan: SortPlan, vectors: np.ndarray) -> np.ndarray:
    """Execute the plan on a batch of input vectors (shape (V, N)); returns
    the sorted vectors.  Semantics are identical to `simulate_plan`."""
    vectors = np.asarray(vectors, dtype=np.int64)
    if vectors.ndim != 2 or vectors.shape[1] != plan.n_inputs:
        raise NetworkError(f"expected shape (V, {plan.n_inputs})")
    if vectors.size:
        _check_values(plan.mode, [int(vectors.min()), int(vectors.max())])
    unit = plan.mode.build_unit()
    values = vectors.copy()
    for step in plan.steps:
        _run_step_cas_batch(unit, plan.mode, values, step.cas)
    return values


def simulate_median_batch(plan: MedianPlan, windows: np.ndarray) -> np.ndarray:
    """Execute the median plan on a batch of 9-value windows."""
    windows = np.asarray(windows, dtype=np.int64)
    if windows.ndim != 2 or windows.shape[1] != 9:
        raise NetworkError("expected shape (W, 9)")
    _check_values(plan.mode, [int(windows.min()), int(windows.max())])
    unit = plan.mode.build_unit()
    values = windows.copy()
    for step in plan.steps:
        _run_step_cas_batch(unit, plan.mode, values, step.cas)
    return values[:, plan.output_slot]


def plan_event_counts(plan: Union["SortPlan", "MedianPlan"]) -> OpCounts:
    """Aggregate op events of every unit execution and copy move in a plan."""
    unit = plan.mode.build_unit()
    cas_total = sum(len(s.cas) for s in plan.steps)
    routed = (plan.copy_total if isinstance(plan, SortPlan)
              else plan.copies_routed)
    return _plan_events(unit, plan.mode, cas_total, routed)


# ---------------------------------------------------------------------------
# Plan serialization
# ---------------------------------------------------------------------------

def _mode_dict(mode: Mode) -> dict:
    if isinstance(mode, BinaryMode):
        return {"kind": "binary", "data_width": mode.n}
    return {"kind": "unary", "bitstream_length": mode.length}


def plan_to_dict(plan: Union[SortPlan, MedianPlan]) -> dict:
    doc = {
        "mode": _mode_dict(plan.mode),
        "partitions": plan.partitions,
        "dimension": list(plan.dimension),
        "steps": [
            {
                "copies": [[c.slot, c.src, c.dst] for c in step.copies],
                "cas": [[pc.partition, pc.a, pc.b, pc.ascending]
                        for pc in step.cas],
            }
            for step in plan.steps
        ],
        "cycle_account": plan.cycle_account.as_dict(),
    }
    if isinstance(plan, SortPlan):
        doc["n_inputs"] = plan.n_inputs
    else:
        doc["n_inputs"] = 9
        doc["output_slot"] = plan.output_slot
    doc["event_counts"] = plan_event_counts(plan).as_dict()
    return doc
