"""Unary bit-stream encoding and the fixed-latency unary compare-and-swap.

A unary bit-stream of length L is a run of 1s followed by 0s; it represents
the value ones/L.  On two same-length unary streams, bit-wise AND yields the
minimum and bit-wise OR the maximum, so a sorting unit needs no comparator.

The in-memory unit stores the two streams in two columns of an Lx5 crossbar
and runs a fixed six-cycle program (five gate cycles plus one bulk re-init),
independent of L:

    cycle 1  NOT A        -> column 2
    cycle 2  NOT B        -> column 3
    cycle 3  NOR(c2, c3)  -> column 4   (minimum = AND via De Morgan)
    cycle 4  re-init columns 2 and 3
    cycle 5  NOR(A, B)    -> column 2
    cycle 6  NOT c2       -> column 3   (maximum = OR)

The three working columns must hold LRS when the program starts; the unit
declares them as preset cells, and the surrounding system provides them with
its per-step bulk initialization cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Crossbar,
    MagicSortError,
    OpCounts,
    OpKind,
    Schedule,
    execute_schedule,
    execute_schedule_batch,
    init_cycle,
    row_parallel,
    validate_schedule,
)


class EncodingError(MagicSortError):
    pass


class CapacityError(MagicSortError):
    pass


COL_A, COL_B = 0, 1
COL_W0, COL_W1 = 2, 3   # scratch columns; W1 ends holding the maximum
COL_MIN = 4
UNIT_COLS = 5


@dataclass(frozen=True)
class UnaryBitStream:
    """Left-justified stream: bit i is 1 iff i < ones; value = ones/length."""

    length: int
    ones: int

    def __post_init__(self):
        if self.length < 1:
            raise EncodingError("stream length must be positive")
        if not 0 <= self.ones <= self.length:
            raise EncodingError(
                f"ones count {self.ones} outside [0, {self.length}]")

    @property
    def value(self) -> float:
        return self.ones / self.length

    def bits(self) -> np.ndarray:
        out = np.zeros(self.length, dtype=np.uint8)
        out[:self.ones] = 1
        return out

    def to_string(self) -> str:
        return "1" * self.ones + "0" * (self.length - self.ones)

    @classmethod
    def from_string(cls, text: str) -> "UnaryBitStream":
        if set(text) - {"0", "1"}:
            raise EncodingError("stream text must contain only '0' and '1'")
        ones = text.count("1")
        if text != "1" * ones + "0" * (len(text) - ones):
            raise EncodingError("stream is not left-justified (1s then 0s)")
        return cls(len(text), ones)


def encode_unary(value: int, length: int) -> UnaryBitStream:
    """Encode an integer numerator as a unary stream of the given length."""
    if not 0 <= value <= length:
        raise EncodingError(f"value {value} not encodable in {length} bits")
    return UnaryBitStream(length, value)


def decode_unary(bits: np.ndarray, *, strict: bool = True) -> int:
    """Count of leading 1s; with `strict`, reject non-left-justified input."""
    bits = np.asarray(bits, dtype=np.uint8)
    ones = int(bits.sum())
    if strict and not (bits[:ones] == 1).all():
        raise EncodingError("bits are not a left-justified unary stream")
    return ones


def gate_min_max(a: UnaryBitStream,
                 b: UnaryBitStream) -> tuple[UnaryBitStream, UnaryBitStream]:
    """Reference gate semantics: bit-wise AND is the minimum and bit-wise OR
    the maximum of two same-length unary streams."""
    if a.length != b.length:
        raise EncodingError(
            f"stream lengths differ: {a.length} != {b.length}")
    lo = np.bitwise_and(a.bits(), b.bits())
    hi = np.bitwise_or(a.bits(), b.bits())
    return (UnaryBitStream(a.length, decode_unary(lo)),
            UnaryBitStream(a.length, decode_unary(hi)))


@dataclass
class UnaryCasStats:
    """Resource profile of the unit.  Initialization events cover the
    pre-arming of the three working columns (3L), the mid-run re-init of the
    two scratch columns (2L) and the recycling of the output column charged
    to this unit by the published accounting (L)."""

    length: int
    rows: int
    cols: int
    reused_memristors: int
    nor_ops: int
    not_ops: int
    init_cycles: int
    operation_cycles: int
    init_events: int

    def as_dict(self) -> dict:
        return {
            "bitstream_length": self.length,
            "dimension": f"{self.rows}x{self.cols}",
            "reused_memristors": self.reused_memristors,
            "nor_ops": self.nor_ops,
            "not_ops": self.not_ops,
            "init_cycles": self.init_cycles,
            "operation_cycles": self.operation_cycles,
            "init_events": self.init_events,
        }


@dataclass(frozen=True)
class UnaryPlacement:
    a_col: int = COL_A
    b_col: int = COL_B
    min_col: int = COL_MIN
    max_col: int = COL_W1


@dataclass
class UnaryCasUnit:
    length: int
    schedule: Schedule
    placement: UnaryPlacement
    stats: UnaryCasStats

    @property
    def processing_cycles(self) -> int:
        return self.stats.operation_cycles

    @property
    def schedule_cycles(self) -> int:
        return self.stats.operation_cycles + self.stats.init_cycles

    def event_counts(self) -> OpCounts:
        """Schedule recount plus the externally provided arming events."""
        counts = self.schedule.stats()
        counts.inits = self.stats.init_events
        return counts


def build_unary_cas(length: int,
                    row_budget: int | None = None) -> UnaryCasUnit:
    """Compile the unary unit for streams of the given length.

    Latency is five operation cycles plus one init cycle regardless of
    length.  Streams longer than the available rows are rejected; splitting a
    stream over several columns is not supported.
    """
    if length < 1:
        raise CapacityError("stream length must be at least 1")
    if row_budget is not None and length > row_budget:
        raise CapacityError(
            f"stream length {length} exceeds the {row_budget}-row budget; "
            "splitting across columns is not supported")
    rows = range(length)
    cycles = (
        row_parallel(OpKind.NOT, [COL_A], COL_W0, rows),
        row_parallel(OpKind.NOT, [COL_B], COL_W1, rows),
        row_parallel(OpKind.NOR2, [COL_W0, COL_W1], COL_MIN, rows),
        init_cycle([(r, c) for c in (COL_W0, COL_W1) for r in rows]),
        row_parallel(OpKind.NOR2, [COL_A, COL_B], COL_W0, rows),
        row_parallel(OpKind.NOT, [COL_W0], COL_W1, rows),
    )
    preset = tuple((r, c) for c in (COL_W0, COL_W1, COL_MIN) for r in rows)
    schedule = Schedule(rows=length, cols=UNIT_COLS, cycles=cycles,
                        preset=preset)
    report = validate_schedule(schedule)
    if not report.ok:
        raise MagicSortError("unary unit failed validation:\n"
                             + report.summary())
    stats = UnaryCasStats(
        length=length,
        rows=length,
        cols=UNIT_COLS,
        reused_memristors=4 * length,
        nor_ops=2 * length,
        not_ops=3 * length,
        init_cycles=1,
        operation_cycles=5,
        init_events=6 * length,
    )
    return UnaryCasUnit(length, schedule, UnaryPlacement(), stats)


def operand_image(unit: UnaryCasUnit, a: UnaryBitStream,
                  b: UnaryBitStream) -> Crossbar:
    """Image with both streams loaded (stream bit i in row i) and the preset
    working columns armed to LRS."""
    L = unit.length
    if a.length != L or b.length != L:
        raise EncodingError("stream lengths do not match the unit")
    cells = np.zeros((L, UNIT_COLS), dtype=np.uint8)
    cells[:, COL_A] = a.bits()
    cells[:, COL_B] = b.bits()
    for (r, c) in unit.schedule.preset:
        cells[r, c] = 1
    return Crossbar(L, UNIT_COLS, cells)


def simulate_min_max(unit: UnaryCasUnit, a: UnaryBitStream,
                     b: UnaryBitStream) -> tuple[UnaryBitStream,
                                                 UnaryBitStream]:
    """Run the in-memory unit on two streams; returns (min, max)."""
    final, _ = execute_schedule(unit.schedule, operand_image(unit, a, b),
                                check=False)
    lo = decode_unary(final.cells[:, unit.placement.min_col])
    hi = decode_unary(final.cells[:, unit.placement.max_col])
    return UnaryBitStream(unit.length, lo), UnaryBitStream(unit.length, hi)


def simulate_min_max_batch(unit: UnaryCasUnit, ones_a: np.ndarray,
                           ones_b: np.ndarray) -> tuple[np.ndarray,
                                                        np.ndarray]:
    """Vectorized unit simulation over arrays of ones-counts."""
    L = unit.length
    ones_a = np.asarray(ones_a, dtype=np.int64)
    ones_b = np.asarray(ones_b, dtype=np.int64)
    if ones_a.shape != ones_b.shape:
        raise MagicSortError("operand arrays must have matching shapes")
    batch = np.zeros(ones_a.shape + (L, UNIT_COLS), dtype=np.uint8)
    idx = np.arange(L)
    batch[..., :, COL_A] = idx < ones_a[..., None]
    batch[..., :, COL_B] = idx < ones_b[..., None]
    batch[..., :, COL_W0] = 1
    batch[..., :, COL_W1] = 1
    batch[..., :, COL_MIN] = 1
    out, _ = execute_schedule_batch(unit.schedule, batch, check=False)
    lo = out[..., :, unit.placement.min_col].sum(axis=-1)
    hi = out[..., :, unit.placement.max_col].sum(axis=-1)
    return lo, hi
