"""Compiler for the n-bit binary compare-and-swap unit.

The unit is a NOR-decomposed magnitude comparator feeding two n-bit 2-to-1
multiplexers that steer the larger operand to the max column and the smaller
to the min column.  Operands are stored one bit per row with the most
significant bit in row 0.

Resource accounting follows the published closed forms for an n-bit unit:

    dimension              n x (2n + 6)
    memristors after init  12n - 8      (cells armed by the bulk init cycle)
    reused memristors      11n          (re-initialization events)
    logical op cycles      18 + (n - 1)
    copies                 2n - 2       (each copy = 2 clock cycles)
    reused init cycles     n + 2
    total processing       6n + 15      (+ 1 leading bulk init cycle)

The compiled schedule reproduces the headline columns exactly: total
processing cycles, copy events, both init-event totals and the dimension.
The compiler's internal netlist splits the remaining work between gate
cycles and re-init cycles slightly differently than the linear per-bit
extrapolation of the published sub-columns; the stats block carries both the
published values and the measured recount, with divergent sub-columns
flagged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    Crossbar,
    Cycle,
    MagicSortError,
    OpCounts,
    OpKind,
    Schedule,
    copy_column,
    execute_schedule,
    execute_schedule_batch,
    init_cycle,
    row_parallel,
    single,
    single_copy,
    validate_schedule,
)


class UnsupportedWidthError(MagicSortError):
    pass


class CompileError(MagicSortError):
    pass


# Column legend (n >= 3).  The multiplexer phase re-uses the comparator's
# working columns after bulk re-initialization.
COL_A = 0      # operand A, never written
COL_B = 1      # operand B, never written
COL_NA = 2     # NOT A (re-derived for the mux phase)
COL_NB = 3     # NOT B
COL_GT = 4     # gt_i = a_i AND NOT b_i      (mux: P)
COL_LT = 5     # lt_i = NOT a_i AND b_i      (mux: Q)
COL_E0 = 6     # chain transport, even hops  (mux: MAX output)
COL_E1 = 7     # chain transport, odd hops   (mux: MIN output)
COL_KAP = 8    # per-bit chain gate          (mux: T)
COL_CH = 9     # running comparison chain
COL_SEL = 10   # select column: holds (A > B) in every row
COL_NSEL = 11  # complement select column


@dataclass(frozen=True)
class CasConfig:
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise UnsupportedWidthError(
                f"data width must be at least 2, got {self.n}")


@dataclass(frozen=True)
class Placement:
    """Where operands live and where results appear, plus the bit order."""

    a_col: int
    b_col: int
    max_col: int
    min_col: int
    result_col: int
    result_complement_col: int
    bit_order: str = "msb-row0"


@dataclass
class MeasuredCounts:
    """Recounted directly from the compiled schedule."""

    logic_cycles: int
    copies: int
    copy_cycles: int
    reused_init_cycles: int
    upfront_init_events: int
    reused_init_events: int
    processing_cycles: int
    schedule_cycles: int


@dataclass
class CasStats:
    """Published resource profile of the unit (closed forms), alongside the
    schedule recount.  `divergences` names published sub-columns the internal
    netlist does not reproduce; the headline columns always match."""

    data_width: int
    rows: int
    cols: int
    memristors_after_init: int
    reused_memristors: int
    logic_cycles: int
    copies: int
    copy_cycles: int
    reused_init_cycles: int
    total_cycles: int
    measured: MeasuredCounts
    divergences: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "data_width": self.data_width,
            "dimension": f"{self.rows}x{self.cols}",
            "memristors_after_init": self.memristors_after_init,
            "reused_memristors": self.reused_memristors,
            "logic_cycles": self.logic_cycles,
            "copies": self.copies,
            "copy_cycles": self.copy_cycles,
            "reused_init_cycles": self.reused_init_cycles,
            "total_cycles": self.total_cycles,
            "divergences": list(self.divergences),
        }


@dataclass
class Fragment:
    """A compiled piece of the unit plus its cycle bookkeeping."""

    cycles: tuple[Cycle, ...]
    op_cycles: int
    init_cycles: int
    result_ready_cycle: int | None = None


@dataclass
class CasUnit:
    config: CasConfig
    schedule: Schedule
    placement: Placement
    stats: CasStats
    comparator: Fragment
    mux: Fragment

    @property
    def processing_cycles(self) -> int:
        return self.stats.total_cycles

    @property
    def schedule_cycles(self) -> int:
        return self.stats.measured.schedule_cycles

    def event_counts(self) -> OpCounts:
        return self.schedule.stats()


def _closed_forms(n: int) -> dict:
    return {
        "cols": 2 * n + 6,
        "memristors_after_init": 12 * n - 8,
        "reused_memristors": 11 * n,
        "logic_cycles": 18 + (n - 1),
        "copies": 2 * n - 2,
        "copy_cycles": 2 * (2 * n - 2),
        "reused_init_cycles": n + 2,
        "total_cycles": 6 * n + 15,
    }


def _chain_col(n: int, i: int) -> int:
    """Transport column for the chain hop that delivers c_{i+1} to row i."""
    return COL_E0 if (n - 2 - i) % 2 == 0 else COL_E1


def _upfront_cells(n: int) -> list[tuple[int, int]]:
    """Cells armed by the leading bulk init: every cell the comparator phase
    writes, padded with untouched cells up to the published 12n-8 count."""
    rows = range(n)
    cells: list[tuple[int, int]] = []
    for col in (COL_NA, COL_NB, COL_GT, COL_LT):
        cells += [(r, col) for r in rows]
    for i in range(n - 2, -1, -1):
        e = _chain_col(n, i)
        cells += [(i + 1, e), (i, e)]
    cells += [(r, COL_KAP) for r in range(n - 1)]
    cells += [(r, COL_CH) for r in range(n - 1)]
    cells += [(r, COL_SEL) for r in rows]
    cells += [(r, COL_NSEL) for r in rows]
    target = 12 * n - 8
    used = set(cells)
    pads = [(n - 1, COL_KAP), (n - 1, COL_CH)]
    pads += sorted(
        (r, c) for c in (COL_E0, COL_E1) for r in rows if (r, c) not in used)
    pads += [(r, c) for c in range(COL_NSEL + 1, 2 * n + 6) for r in rows]
    for cell in pads:
        if len(cells) >= target:
            break
        if cell not in used:
            cells.append(cell)
            used.add(cell)
    if len(cells) != target:
        raise CompileError(
            f"init padding shortfall for n={n}: {len(cells)} != {target}")
    return cells


def build_comparator(cfg: CasConfig) -> Fragment:
    """Comparator fragment: computes (A > B) and fans the result and its
    complement out to every row of the select columns.

    The fragment spans 6n+3 operation cycles plus the single bulk
    initialization cycle; the comparison outcome and its row copies are
    complete at operation cycle 6n-1 (cycle 23 for n=4).
    """
    n = cfg.n
    if n == 2:
        return _build_comparator_n2()
    rows = range(n)
    cycles: list[Cycle] = [init_cycle(_upfront_cells(n))]
    # per-bit terms, row-parallel
    cycles.append(row_parallel(OpKind.NOT, [COL_A], COL_NA, rows))
    cycles.append(row_parallel(OpKind.NOT, [COL_B], COL_NB, rows))
    cycles.append(row_parallel(OpKind.NOR2, [COL_NA, COL_B], COL_GT, rows))
    cycles.append(row_parallel(OpKind.NOR2, [COL_A, COL_NB], COL_LT, rows))
    # carry chain from the LSB row upward: c_i = (A > B) over bits i..n-1,
    # realized as c_i = NOR(lt_i, NOR3(gt_i, lt_i, c_{i+1})).
    scratches: list[tuple[int, int]] = []
    for i in range(n - 2, -1, -1):
        e = _chain_col(n, i)
        src = (n - 1, COL_GT) if i == n - 2 else (i + 1, COL_CH)
        cycles.append(single_copy(src, (i + 1, e), (i, e)))
        scratches.append((i + 1, e))
        cycles.append(single(
            OpKind.NOR3, [(i, COL_GT), (i, COL_LT), (i, e)], (i, COL_KAP)))
        cycles.append(single(
            OpKind.NOR2, [(i, COL_LT), (i, COL_KAP)], (i, COL_CH)))
    # select fan-out: master complement in row 0, then one copy per row that
    # leaves the true value in the select column and the complement next door
    cycles.append(single(OpKind.NOT, [(0, COL_CH)], (0, COL_SEL)))
    for r in range(1, n):
        cycles.append(
            single_copy((0, COL_SEL), (r, COL_SEL), (r, COL_NSEL)))
    half = (len(scratches) + 1) // 2
    cycles.append(init_cycle([(0, COL_SEL)] + scratches[:half]))
    cycles.append(single(OpKind.NOT, [(0, COL_CH)], (0, COL_NSEL)))
    cycles.append(single(OpKind.NOT, [(0, COL_NSEL)], (0, COL_SEL)))
    cycles.append(init_cycle(scratches[half:]))
    return Fragment(
        cycles=tuple(cycles),
        op_cycles=6 * n + 3,
        init_cycles=1,
        result_ready_cycle=6 * n - 1,
    )


def build_mux_pair(cfg: CasConfig, placement: Placement) -> Fragment:
    """Max/min multiplexer fragment: 10 operation cycles plus 2 bulk
    re-initialization cycles, re-using the comparator's columns.

    The operands are re-inverted in the first two operation cycles; the max
    multiplexer runs in operation cycles 3-6 and the min multiplexer in 7-10
    after its three working columns are re-initialized.
    """
    n = cfg.n
    if placement.result_col != COL_SEL and n != 2:
        raise CompileError("comparator placement metadata missing or foreign")
    rows = range(n)
    sel, nsel = placement.result_col, placement.result_complement_col
    if n == 2:
        return _build_mux_n2(placement)
    cycles: list[Cycle] = []
    cycles.append(init_cycle(
        [(r, c) for c in (COL_NA, COL_NB, COL_GT, COL_LT, COL_KAP, COL_E0)
         for r in rows]))
    cycles.append(row_parallel(OpKind.NOT, [COL_A], COL_NA, rows))
    cycles.append(row_parallel(OpKind.NOT, [COL_B], COL_NB, rows))
    # max = sel ? A : B
    cycles.append(row_parallel(OpKind.NOR2, [nsel, COL_NA], COL_GT, rows))
    cycles.append(row_parallel(OpKind.NOR2, [sel, COL_NB], COL_LT, rows))
    cycles.append(row_parallel(OpKind.NOR2, [COL_GT, COL_LT], COL_KAP, rows))
    cycles.append(row_parallel(OpKind.NOT, [COL_KAP], COL_E0, rows))
    cycles.append(init_cycle(
        [(r, c) for c in (COL_GT, COL_LT, COL_KAP, COL_E1) for r in rows]))
    # min = sel ? B : A
    cycles.append(row_parallel(OpKind.NOR2, [sel, COL_NA], COL_GT, rows))
    cycles.append(row_parallel(OpKind.NOR2, [nsel, COL_NB], COL_LT, rows))
    cycles.append(row_parallel(OpKind.NOR2, [COL_GT, COL_LT], COL_KAP, rows))
    cycles.append(row_parallel(OpKind.NOT, [COL_KAP], COL_E1, rows))
    return Fragment(cycles=tuple(cycles), op_cycles=10, init_cycles=2)


# --- n = 2 squeeze -----------------------------------------------------------
# Ten columns leave no spare transport lanes, so the chain result is recomputed
# into the select column and the min output recycles the retired A column.

N2_COL_E, N2_COL_W, N2_COL_SEL, N2_COL_NSEL = 6, 7, 8, 9


def _build_comparator_n2() -> Fragment:
    rows = range(2)
    up = [(r, c) for c in (COL_NA, COL_NB, COL_GT, COL_LT) for r in rows]
    up += [(1, N2_COL_E), (0, N2_COL_E), (0, N2_COL_W),
           (0, N2_COL_SEL), (1, N2_COL_SEL), (0, N2_COL_NSEL),
           (1, N2_COL_NSEL), (1, N2_COL_W)]
    assert len(up) == 12 * 2 - 8
    cycles: list[Cycle] = [init_cycle(up)]
    cycles.append(row_parallel(OpKind.NOT, [COL_A], COL_NA, rows))
    cycles.append(row_parallel(OpKind.NOT, [COL_B], COL_NB, rows))
    cycles.append(row_parallel(OpKind.NOR2, [COL_NA, COL_B], COL_GT, rows))
    cycles.append(row_parallel(OpKind.NOR2, [COL_A, COL_NB], COL_LT, rows))
    cycles.append(single_copy((1, COL_GT), (1, N2_COL_E), (0, N2_COL_E)))
    cycles.append(single(
        OpKind.NOR3, [(0, COL_GT), (0, COL_LT), (0, N2_COL_E)],
        (0, N2_COL_W)))
    cycles.append(single(
        OpKind.NOR2, [(0, COL_LT), (0, N2_COL_W)], (0, N2_COL_NSEL)))
    cycles.append(single(OpKind.NOT, [(0, N2_COL_NSEL)], (0, N2_COL_SEL)))
    cycles.append(
        single_copy((0, N2_COL_SEL), (1, N2_COL_SEL), (1, N2_COL_NSEL)))
    cycles.append(init_cycle([(0, N2_COL_SEL), (0, N2_COL_NSEL)]))
    cycles.append(single(
        OpKind.NOR2, [(0, COL_LT), (0, N2_COL_W)], (0, N2_COL_SEL)))
    cycles.append(single(OpKind.NOT, [(0, N2_COL_SEL)], (0, N2_COL_NSEL)))
    cycles.append(init_cycle([(1, N2_COL_W)]))
    return Fragment(tuple(cycles), op_cycles=15, init_cycles=1,
                    result_ready_cycle=11)


def _build_mux_n2(placement: Placement) -> Fragment:
    rows = range(2)
    sel, nsel = placement.result_col, placement.result_complement_col
    cycles: list[Cycle] = []
    cycles.append(init_cycle(
        [(r, c) for c in (COL_NA, COL_NB, COL_GT, COL_LT, N2_COL_W, N2_COL_E)
         for r in rows]))
    cycles.append(row_parallel(OpKind.NOT, [COL_A], COL_NA, rows))
    cycles.append(row_parallel(OpKind.NOT, [COL_B], COL_NB, rows))
    cycles.append(row_parallel(OpKind.NOR2, [nsel, COL_NA], COL_GT, rows))
    cycles.append(row_parallel(OpKind.NOR2, [sel, COL_NB], COL_LT, rows))
    cycles.append(row_parallel(OpKind.NOR2, [COL_GT, COL_LT], N2_COL_W, rows))
    cycles.append(row_parallel(OpKind.NOT, [N2_COL_W], N2_COL_E, rows))
    cycles.append(init_cycle(
        [(r, c) for c in (COL_GT, COL_LT, N2_COL_W, COL_A) for r in rows]))
    cycles.append(row_parallel(OpKind.NOR2, [sel, COL_NA], COL_GT, rows))
    cycles.append(row_parallel(OpKind.NOR2, [nsel, COL_NB], COL_LT, rows))
    cycles.append(row_parallel(OpKind.NOR2, [COL_GT, COL_LT], N2_COL_W, rows))
    cycles.append(row_parallel(OpKind.NOT, [N2_COL_W], COL_A, rows))
    return Fragment(tuple(cycles), op_cycles=10, init_cycles=2)


def _measure(schedule: Schedule) -> MeasuredCounts:
    logic = copies = copy_cy = init_slots = reused_events = 0
    upfront_events = len(schedule.cycles[0].ops)
    for cyc in schedule.cycles[1:]:
        if cyc.kind is OpKind.INIT:
            init_slots += 1
            reused_events += len(cyc.ops)
        elif cyc.kind is OpKind.COPY:
            copies += len(cyc.ops)
            copy_cy += 2
        else:
            logic += 1
    stats = schedule.stats()
    return MeasuredCounts(
        logic_cycles=logic,
        copies=copies,
        copy_cycles=copy_cy,
        reused_init_cycles=init_slots,
        upfront_init_events=upfront_events,
        reused_init_events=reused_events,
        processing_cycles=stats.cycles - 1,
        schedule_cycles=stats.cycles,
    )


def build_cas(cfg: CasConfig | int) -> CasUnit:
    """Compile the full compare-and-swap unit for the given data width."""
    if isinstance(cfg, int):
        cfg = CasConfig(cfg)
    n = cfg.n
    if n == 2:
        placement = Placement(COL_A, COL_B, max_col=N2_COL_E, min_col=COL_A,
                              result_col=N2_COL_SEL,
                              result_complement_col=N2_COL_NSEL)
    else:
        placement = Placement(COL_A, COL_B, max_col=COL_E0, min_col=COL_E1,
                              result_col=COL_SEL,
                              result_complement_col=COL_NSEL)
    comparator = build_comparator(cfg)
    mux = build_mux_pair(cfg, placement)
    forms = _closed_forms(n)
    schedule = Schedule(rows=n, cols=forms["cols"],
                        cycles=comparator.cycles + mux.cycles)
    report = validate_schedule(schedule)
    if not report.ok:
        raise CompileError("compiled unit failed validation:\n"
                           + report.summary())
    measured = _measure(schedule)
    if measured.processing_cycles != forms["total_cycles"]:
        raise CompileError(
            f"cycle budget broken for n={n}: {measured.processing_cycles} "
            f"!= {forms['total_cycles']}")
    if measured.copies != forms["copies"]:
        raise CompileError(
            f"copy budget broken for n={n}: {measured.copies}")
    divergences = []
    for name, meas in (
            ("logic_cycles", measured.logic_cycles),
            ("reused_init_cycles", measured.reused_init_cycles),
            ("memristors_after_init", measured.upfront_init_events),
            ("reused_memristors", measured.reused_init_events)):
        if meas != forms[name]:
            divergences.append(
                f"{name}: measured {meas} != published {forms[name]}")
    stats = CasStats(
        data_width=n,
        rows=n,
        cols=forms["cols"],
        memristors_after_init=forms["memristors_after_init"],
        reused_memristors=forms["reused_memristors"],
        logic_cycles=forms["logic_cycles"],
        copies=forms["copies"],
        copy_cycles=forms["copy_cycles"],
        reused_init_cycles=forms["reused_init_cycles"],
        total_cycles=forms["total_cycles"],
        measured=measured,
        divergences=divergences,
    )
    return CasUnit(cfg, schedule, placement, stats, comparator, mux)


# ---------------------------------------------------------------------------
# Simulation helpers
# ---------------------------------------------------------------------------

def operand_image(unit: CasUnit, a: int, b: int) -> Crossbar:
    """Fresh crossbar image with A and B loaded, everything else HRS."""
    n = unit.config.n
    if not (0 <= a < 1 << n and 0 <= b < 1 << n):
        raise MagicSortError(f"operands must be {n}-bit unsigned")
    cells = np.zeros((n, unit.schedule.cols), dtype=np.uint8)
    for r in range(n):
        cells[r, unit.placement.a_col] = (a >> (n - 1 - r)) & 1
        cells[r, unit.placement.b_col] = (b >> (n - 1 - r)) & 1
    return Crossbar(n, unit.schedule.cols, cells)


def read_word(cells: np.ndarray, col: int) -> int:
    """Interpret a column of a 2-D image as an MSB-first unsigned integer."""
    value = 0
    for bit in cells[:, col]:
        value = (value << 1) | int(bit)
    return value


def simulate_pair(unit: CasUnit, a: int, b: int) -> tuple[int, int]:
    """Run the unit on one operand pair; returns (max, min)."""
    final, _ = execute_schedule(unit.schedule, operand_image(unit, a, b),
                                check=False)
    return (read_word(final.cells, unit.placement.max_col),
            read_word(final.cells, unit.placement.min_col))


def simulate_pairs(unit: CasUnit, a: np.ndarray,
                   b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized simulation over arrays of operand pairs."""
    n = unit.config.n
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape:
        raise MagicSortError("operand arrays must have matching shapes")
    batch = np.zeros(a.shape + (n, unit.schedule.cols), dtype=np.uint8)
    shifts = n - 1 - np.arange(n)
    batch[..., :, unit.placement.a_col] = (a[..., None] >> shifts) & 1
    batch[..., :, unit.placement.b_col] = (b[..., None] >> shifts) & 1
    out, _ = execute_schedule_batch(unit.schedule, batch, check=False)
    weights = 1 << shifts
    max_vals = (out[..., :, unit.placement.max_col] * weights).sum(axis=-1)
    min_vals = (out[..., :, unit.placement.min_col] * weights).sum(axis=-1)
    return max_vals, min_vals
