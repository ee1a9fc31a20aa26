"""Memristive crossbar model and executor for stateful NOR/NOT (MAGIC) schedules.

A crossbar is a grid of two-state resistive cells: LRS encodes logical 1,
HRS encodes logical 0.  Computation is expressed as a cycle-indexed schedule
of micro-operations.  Within a clock cycle all operations read the pre-cycle
state and the controller drives one aligned group of same-kind gates.

Gate semantics: the output cell must have been initialized to LRS; it then
conditionally switches to HRS unless all inputs are HRS (i.e. the cell ends
up holding NOR of the inputs).  A copy is a composite of two consecutive NOT
operations through a scratch cell, so it occupies two clock cycles and leaves
the complement of the source in the scratch.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

import numpy as np

SCHEDULE_FORMAT_VERSION = "1"

LRS = 1  # low resistance state, logical 1
HRS = 0  # high resistance state, logical 0


class MagicSortError(Exception):
    """Base class for errors raised by this package."""


class InvalidOpError(MagicSortError):
    pass


class DimensionError(MagicSortError):
    pass


class ScheduleValidationError(MagicSortError):
    def __init__(self, report: "ValidationReport"):
        super().__init__("schedule failed validation:\n" + report.summary())
        self.report = report


class OpKind(str, Enum):
    INIT = "init"
    NOT = "not"
    NOR2 = "nor2"
    NOR3 = "nor3"
    NOR4 = "nor4"
    COPY = "copy"


# Number of input cells each kind reads.
_ARITY = {
    OpKind.INIT: 0,
    OpKind.NOT: 1,
    OpKind.NOR2: 2,
    OpKind.NOR3: 3,
    OpKind.NOR4: 4,
    OpKind.COPY: 1,
}

# A cell reference is a (row, col) pair, 0-based.
Cell = tuple[int, int]


def nor_eval(inputs: Sequence[int]) -> int:
    """NOR of 1..4 binary states; the single-input case is NOT."""
    if not 1 <= len(inputs) <= 4:
        raise InvalidOpError(f"NOR gate takes 1..4 inputs, got {len(inputs)}")
    for v in inputs:
        if v not in (0, 1):
            raise InvalidOpError(f"cell state must be 0 or 1, got {v!r}")
    return 1 if all(v == 0 for v in inputs) else 0


@dataclass(frozen=True)
class MicroOp:
    """One gate event: kind, ordered input cells, output cell.

    Copies carry an explicit scratch cell; the expansion writes NOT(src) into
    the scratch and the source state into the output.
    """

    kind: OpKind
    inputs: tuple[Cell, ...]
    output: Cell
    scratch: Optional[Cell] = None

    def written_cells(self) -> tuple[Cell, ...]:
        if self.kind is OpKind.COPY and self.scratch is not None:
            return (self.scratch, self.output)
        return (self.output,)


@dataclass(frozen=True)
class Cycle:
    """A group of micro-ops issued concurrently; all must share one kind."""

    kind: OpKind
    ops: tuple[MicroOp, ...]

    @property
    def clock_cycles(self) -> int:
        return 2 if self.kind is OpKind.COPY else 1


@dataclass
class OpCounts:
    """Per-kind event totals for a schedule or an execution trace."""

    inits: int = 0
    copies: int = 0
    nots: int = 0
    nor2: int = 0
    nor3: int = 0
    nor4: int = 0
    cycles: int = 0

    def __add__(self, other: "OpCounts") -> "OpCounts":
        return OpCounts(
            self.inits + other.inits,
            self.copies + other.copies,
            self.nots + other.nots,
            self.nor2 + other.nor2,
            self.nor3 + other.nor3,
            self.nor4 + other.nor4,
            self.cycles + other.cycles,
        )

    def scaled(self, k: int) -> "OpCounts":
        return OpCounts(
            self.inits * k, self.copies * k, self.nots * k,
            self.nor2 * k, self.nor3 * k, self.nor4 * k, self.cycles * k,
        )

    def as_dict(self) -> dict:
        return {
            "inits": self.inits,
            "copies": self.copies,
            "not": self.nots,
            "nor2": self.nor2,
            "nor3": self.nor3,
            "nor4": self.nor4,
            "cycles": self.cycles,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OpCounts":
        return cls(d["inits"], d["copies"], d["not"], d["nor2"], d["nor3"],
                   d["nor4"], d["cycles"])


_COUNT_FIELD = {
    OpKind.INIT: "inits",
    OpKind.COPY: "copies",
    OpKind.NOT: "nots",
    OpKind.NOR2: "nor2",
    OpKind.NOR3: "nor3",
    OpKind.NOR4: "nor4",
}


@dataclass(frozen=True)
class Schedule:
    """A validated-by-construction-or-checked program for one crossbar.

    `preset` lists cells the caller guarantees are LRS when execution starts
    (the surrounding system arms them with a bulk initialization cycle that
    is accounted outside this schedule).  Schedules are immutable and safe to
    share between executors.
    """

    rows: int
    cols: int
    cycles: tuple[Cycle, ...]
    preset: tuple[Cell, ...] = ()

    def stats(self) -> OpCounts:
        """Recount op events and clock cycles over the cycle list."""
        c = OpCounts()
        for cyc in self.cycles:
            c.cycles += cyc.clock_cycles
            for op in cyc.ops:
                if op.kind is OpKind.INIT:
                    c.inits += 1
                else:
                    setattr(c, _COUNT_FIELD[op.kind],
                            getattr(c, _COUNT_FIELD[op.kind]) + 1)
        return c


@dataclass
class Crossbar:
    """Grid of two-state cells.  Dimensions are fixed at construction and the
    constructor requires an explicit initial image; no default state is
    assumed.  A Crossbar instance must be mutated by at most one executor at
    a time."""

    rows: int
    cols: int
    cells: np.ndarray

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise DimensionError("crossbar dimensions must be positive")
        self.cells = np.asarray(self.cells, dtype=np.uint8)
        if self.cells.shape != (self.rows, self.cols):
            raise DimensionError(
                f"cell image shape {self.cells.shape} does not match "
                f"({self.rows}, {self.cols})")
        if not np.isin(self.cells, (HRS, LRS)).all():
            raise InvalidOpError("cells must be 0 (HRS) or 1 (LRS)")

    @classmethod
    def filled(cls, rows: int, cols: int, state: int) -> "Crossbar":
        if state not in (HRS, LRS):
            raise InvalidOpError("fill state must be 0 or 1")
        return cls(rows, cols, np.full((rows, cols), state, dtype=np.uint8))

    def copy(self) -> "Crossbar":
        return Crossbar(self.rows, self.cols, self.cells.copy())


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    code: str
    cycle: int
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(f"[cycle {v.cycle}] {v.code}: {v.message}"
                         for v in self.violations)


def _orientation(cells: Sequence[Cell]) -> Optional[str]:
    """'row' if all cells share a row, 'col' if a column, else None.
    Single-cell sets are both; report 'row' for them."""
    rows = {c[0] for c in cells}
    cols = {c[1] for c in cells}
    if len(rows) == 1:
        return "row"
    if len(cols) == 1:
        return "col"
    return None


# Cell lifecycle used by the write-before-init check.
_VIRGIN, _ARMED, _STALE = 0, 1, 2


def validate_schedule(schedule: Schedule) -> ValidationReport:
    """Check bounds, group alignment, kind purity, write conflicts and the
    write-before-init rule.  Returns a report; never raises."""
    rep = ValidationReport()
    R, C = schedule.rows, schedule.cols

    def bad(code: str, cyc: int, msg: str):
        rep.violations.append(Violation(code, cyc, msg))

    status = np.full((R, C), _VIRGIN, dtype=np.uint8)
    for (r, c) in schedule.preset:
        if 0 <= r < R and 0 <= c < C:
            status[r, c] = _ARMED
        else:
            bad("bounds", -1, f"preset cell {(r, c)} outside {R}x{C}")

    for idx, cyc in enumerate(schedule.cycles):
        writes_this_cycle: set[Cell] = set()
        group_sig = None
        for op in cyc.ops:
            # kind purity
            if op.kind is not cyc.kind:
                bad("mixed-kind group", idx,
                    f"op kind {op.kind.value} in a {cyc.kind.value} group")
            # arity and structure
            if len(op.inputs) != _ARITY[op.kind]:
                bad("arity", idx,
                    f"{op.kind.value} takes {_ARITY[op.kind]} inputs, "
                    f"got {len(op.inputs)}")
            if op.kind is OpKind.COPY and op.scratch is None:
                bad("arity", idx, "copy requires a scratch cell")
            cells = list(op.inputs) + list(op.written_cells())
            for (r, c) in cells:
                if not (0 <= r < R and 0 <= c < C):
                    bad("bounds", idx, f"cell {(r, c)} outside {R}x{C}")
            if op.output in op.inputs:
                bad("write conflicts", idx,
                    f"output {op.output} appears among inputs")
            if op.kind is OpKind.COPY and op.scratch is not None:
                if op.scratch in op.inputs or op.scratch == op.output:
                    bad("write conflicts", idx,
                        f"copy scratch {op.scratch} collides with src/dst")
            # collinearity: gates act along one line of the crossbar
            if op.kind in (OpKind.NOT, OpKind.NOR2, OpKind.NOR3, OpKind.NOR4):
                if _orientation(list(op.inputs) + [op.output]) is None:
                    bad("alignment", idx,
                        f"{op.kind.value} cells {op.inputs}->{op.output} "
                        "are not collinear")
            elif op.kind is OpKind.COPY and op.scratch is not None:
                if (_orientation([op.inputs[0], op.scratch]) is None
                        or _orientation([op.scratch, op.output]) is None):
                    bad("alignment", idx,
                        "copy legs src->scratch->dst are not collinear")
            # intra-cycle double writes
            for cell in op.written_cells():
                if cell in writes_this_cycle:
                    bad("write conflicts", idx,
                        f"cell {cell} written twice in one cycle")
                writes_this_cycle.add(cell)
            # write-before-init
            if op.kind is not OpKind.INIT:
                for cell in op.written_cells():
                    if (0 <= cell[0] < R and 0 <= cell[1] < C
                            and status[cell] != _ARMED):
                        bad("write-before-init", idx,
                            f"{op.kind.value} writes {cell} which was not "
                            "initialized to LRS since its last write")
        # group alignment for bulk gate groups
        if cyc.kind in (OpKind.NOT, OpKind.NOR2, OpKind.NOR3, OpKind.NOR4,
                        OpKind.COPY) and len(cyc.ops) > 1:
            sigs = set()
            anchors = set()
            for op in cyc.ops:
                line_cells = list(op.inputs) + list(op.written_cells())
                orient = _orientation(line_cells)
                if orient == "row":
                    sigs.add(("row",
                              tuple(c for _, c in op.inputs),
                              tuple(c for _, c in op.written_cells())))
                    anchors.add(line_cells[0][0])
                elif orient == "col":
                    sigs.add(("col",
                              tuple(r for r, _ in op.inputs),
                              tuple(r for r, _ in op.written_cells())))
                    anchors.add(line_cells[0][1])
                else:
                    sigs.add(("none", (), ()))
            if len(sigs) != 1:
                bad("alignment", idx,
                    "concurrent ops must share orientation and line pattern")
            elif len(anchors) != len(cyc.ops):
                bad("alignment", idx,
                    "concurrent ops must occupy pairwise-distinct lines")
        # commit lifecycle transitions
        for op in cyc.ops:
            if op.kind is OpKind.INIT:
                cell = op.output
                if 0 <= cell[0] < R and 0 <= cell[1] < C:
                    status[cell] = _ARMED
            else:
                for cell in op.written_cells():
                    if 0 <= cell[0] < R and 0 <= cell[1] < C:
                        status[cell] = _STALE
    return rep


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

def _apply_cycles(schedule: Schedule, state: np.ndarray) -> OpCounts:
    """Apply all cycles in order to `state` (shape (..., rows, cols)),
    mutating it.  Within a cycle every op reads the pre-cycle state."""
    trace = OpCounts()
    for cyc in schedule.cycles:
        trace.cycles += cyc.clock_cycles
        pending: list[tuple[Cell, Union[int, np.ndarray]]] = []
        for op in cyc.ops:
            if op.kind is OpKind.INIT:
                trace.inits += 1
                pending.append((op.output, 1))
            elif op.kind is OpKind.COPY:
                trace.copies += 1
                src = state[..., op.inputs[0][0], op.inputs[0][1]].copy()
                assert op.scratch is not None
                pending.append((op.scratch, 1 - src))
                pending.append((op.output, src))
            else:
                setattr(trace, _COUNT_FIELD[op.kind],
                        getattr(trace, _COUNT_FIELD[op.kind]) + 1)
                acc = state[..., op.inputs[0][0], op.inputs[0][1]].copy()
                for (r, c) in op.inputs[1:]:
                    acc |= state[..., r, c]
                pending.append((op.output, 1 - acc))
        for (r, c), value in pending:
            state[..., r, c] = value
    return trace


def execute_schedule(schedule: Schedule, initial: Crossbar, *,
                     check: bool = True) -> tuple[Crossbar, OpCounts]:
    """Run a schedule on an initial crossbar image.

    Refuses to run if dimensions mismatch or (when `check`) the validator
    reports violations or a preset cell is not LRS in the image.  Execution
    is deterministic; the returned trace tallies executed op events, with a
    copy contributing one copy event and two clock cycles.
    """
    if (initial.rows, initial.cols) != (schedule.rows, schedule.cols):
        raise DimensionError(
            f"crossbar {initial.rows}x{initial.cols} does not match schedule "
            f"{schedule.rows}x{schedule.cols}")
    if check:
        report = validate_schedule(schedule)
        if not report.ok:
            raise ScheduleValidationError(report)
        for (r, c) in schedule.preset:
            if initial.cells[r, c] != LRS:
                raise InvalidOpError(
                    f"preset cell {(r, c)} must be LRS in the initial image")
    state = initial.cells.copy()
    trace = _apply_cycles(schedule, state)
    return Crossbar(schedule.rows, schedule.cols, state), trace


def execute_schedule_batch(schedule: Schedule, states: np.ndarray, *,
                           check: bool = True) -> tuple[np.ndarray, OpCounts]:
    """Run one schedule over a batch of independent initial images.

    `states` has shape (..., rows, cols); the trace counts one execution of
    the schedule (the batch dimension models independent crossbars driven by
    the same controller sequence).
    """
    states = np.asarray(states, dtype=np.uint8)
    if states.shape[-2:] != (schedule.rows, schedule.cols):
        raise DimensionError(
            f"batch shape {states.shape} does not end in "
            f"({schedule.rows}, {schedule.cols})")
    if check:
        report = validate_schedule(schedule)
        if not report.ok:
            raise ScheduleValidationError(report)
    out = states.copy()
    trace = _apply_cycles(schedule, out)
    return out, trace


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def schedule_to_dict(schedule: Schedule) -> dict:
    cycles = []
    for cyc in schedule.cycles:
        ops = []
        for op in cyc.ops:
            entry: dict = {
                "inputs": [list(c) for c in op.inputs],
                "output": list(op.output),
            }
            if op.scratch is not None:
                entry["scratch"] = list(op.scratch)
            ops.append(entry)
        cycles.append({"kind": cyc.kind.value, "ops": ops})
    return {
        "version": SCHEDULE_FORMAT_VERSION,
        "rows": schedule.rows,
        "cols": schedule.cols,
        "preset": [list(c) for c in schedule.preset],
        "cycles": cycles,
        "stats": schedule.stats().as_dict(),
    }


def schedule_to_json(schedule: Schedule) -> str:
    return json.dumps(schedule_to_dict(schedule), indent=2, sort_keys=True)


def schedule_from_dict(doc: dict) -> Schedule:
    version = doc.get("version")
    if version != SCHEDULE_FORMAT_VERSION:
        raise InvalidOpError(f"unsupported schedule format version {version!r}")
    cycles = []
    for centry in doc["cycles"]:
        kind = OpKind(centry["kind"])
        ops = []
        for oentry in centry["ops"]:
            ops.append(MicroOp(
                kind=kind,
                inputs=tuple(tuple(c) for c in oentry["inputs"]),
                output=tuple(oentry["output"]),
                scratch=(tuple(oentry["scratch"])
                         if "scratch" in oentry else None),
            ))
        cycles.append(Cycle(kind, tuple(ops)))
    sched = Schedule(
        rows=doc["rows"],
        cols=doc["cols"],
        cycles=tuple(cycles),
        preset=tuple(tuple(c) for c in doc.get("preset", [])),
    )
    stats = doc.get("stats")
    if stats is not None and OpCounts.from_dict(stats) != sched.stats():
        raise InvalidOpError("stats block disagrees with cycle recount")
    return sched


def schedule_from_json(text: str) -> Schedule:
    return schedule_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Group construction helpers used by the compilers
# ---------------------------------------------------------------------------

def init_cycle(cells: Iterable[Cell]) -> Cycle:
    ops = tuple(MicroOp(OpKind.INIT, (), cell) for cell in cells)
    return Cycle(OpKind.INIT, ops)


def row_parallel(kind: OpKind, in_cols: Sequence[int], out_col: int,
                 rows: Iterable[int]) -> Cycle:
    """One gate per listed row, all reading the same input columns."""
    ops = tuple(
        MicroOp(kind, tuple((r, c) for c in in_cols), (r, out_col))
        for r in rows)
    return Cycle(kind, ops)


def single(kind: OpKind, inputs: Sequence[Cell], output: Cell) -> Cycle:
    return Cycle(kind, (MicroOp(kind, tuple(inputs), output),))


def single_copy(src: Cell, scratch: Cell, dst: Cell) -> Cycle:
    return Cycle(OpKind.COPY, (MicroOp(OpKind.COPY, (src,), dst, scratch),))


def copy_column(src_col: int, scratch_col: int, dst_col: int,
                rows: Iterable[int]) -> Cycle:
    """Row-parallel copy of a whole column through a scratch column."""
    ops = tuple(
        MicroOp(OpKind.COPY, ((r, src_col),), (r, dst_col), (r, scratch_col))
        for r in rows)
    return Cycle(OpKind.COPY, ops)
