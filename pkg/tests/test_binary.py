"""Binary compare-and-swap compiler: resource profile and functionality."""

import numpy as np
import pytest

from magicsort.binary import (
    CasConfig,
    UnsupportedWidthError,
    build_cas,
    build_comparator,
    build_mux_pair,
    operand_image,
    simulate_pair,
    simulate_pairs,
)
from magicsort.core import OpKind, execute_schedule, schedule_to_json, validate_schedule


WIDTHS = [2, 3, 4, 5, 8, 16, 32]


@pytest.mark.parametrize("n", WIDTHS)
def test_closed_form_resource_profile(n):
    stats = build_cas(n).stats
    assert stats.total_cycles == 6 * n + 15
    assert (stats.rows, stats.cols) == (n, 2 * n + 6)
    assert stats.memristors_after_init == 12 * n - 8
    assert stats.reused_memristors == 11 * n
    assert stats.logic_cycles == 18 + (n - 1)
    assert stats.copies == 2 * n - 2
    assert stats.copy_cycles == 2 * (2 * n - 2)
    assert stats.reused_init_cycles == n + 2
    # the published columns are mutually consistent
    assert (stats.total_cycles
            == stats.logic_cycles + stats.copy_cycles
            + stats.reused_init_cycles)


@pytest.mark.parametrize("n,total", [(4, 39), (8, 63), (16, 111), (32, 207)])
def test_published_cycle_totals(n, total):
    assert build_cas(n).stats.total_cycles == total


@pytest.mark.parametrize("n", WIDTHS)
def test_schedule_matches_headline_columns(n):
    unit = build_cas(n)
    m = unit.stats.measured
    assert m.processing_cycles == 6 * n + 15
    assert m.schedule_cycles == 6 * n + 16  # plus the leading bulk init
    assert m.copies == 2 * n - 2
    assert m.upfront_init_events == 12 * n - 8
    # n=2 squeezes into ten columns and re-arms one extra cell
    expected_reused = 11 * n if n > 2 else 23
    assert m.reused_init_events == expected_reused


def test_comparator_fragment_milestones():
    frag = build_comparator(CasConfig(4))
    assert frag.op_cycles == 27
    assert frag.init_cycles == 1
    assert frag.result_ready_cycle == 23


def test_mux_fragment_milestones():
    unit = build_cas(4)
    frag = build_mux_pair(CasConfig(4), unit.placement)
    assert frag.op_cycles == 10
    assert frag.init_cycles == 2


@pytest.mark.parametrize("n", WIDTHS)
def test_fragment_cycle_shapes_generalize(n):
    unit = build_cas(n)
    assert unit.comparator.op_cycles == 6 * n + 3
    assert unit.comparator.result_ready_cycle == 6 * n - 1
    assert unit.mux.op_cycles == 10
    assert unit.mux.init_cycles == 2


def test_width_below_two_rejected():
    with pytest.raises(UnsupportedWidthError):
        build_cas(1)


def test_mux_requires_comparator_placement():
    from magicsort.binary import CompileError, Placement
    foreign = Placement(a_col=0, b_col=1, max_col=2, min_col=3,
                        result_col=4, result_complement_col=5)
    with pytest.raises(CompileError):
        build_mux_pair(CasConfig(4), foreign)


@pytest.mark.parametrize("n", WIDTHS)
def test_compiled_schedule_validates(n):
    assert validate_schedule(build_cas(n).schedule).ok


def test_compilation_is_deterministic():
    assert schedule_to_json(build_cas(8).schedule) == \
        schedule_to_json(build_cas(8).schedule)


def test_exhaustive_4bit_against_integer_oracle():
    unit = build_cas(4)
    a, b = np.meshgrid(np.arange(16), np.arange(16), indexing="ij")
    hi, lo = simulate_pairs(unit, a.ravel(), b.ravel())
    assert (hi == np.maximum(a, b).ravel()).all()
    assert (lo == np.minimum(a, b).ravel()).all()


def test_random_8bit_pairs_against_integer_oracle():
    unit = build_cas(8)
    rng = np.random.default_rng(20240817)
    a = rng.integers(0, 256, size=1000)
    b = rng.integers(0, 256, size=1000)
    hi, lo = simulate_pairs(unit, a, b)
    assert (hi == np.maximum(a, b)).all()
    assert (lo == np.minimum(a, b)).all()


@pytest.mark.parametrize("n", [2, 3, 5, 16])
def test_random_pairs_other_widths(n):
    unit = build_cas(n)
    rng = np.random.default_rng(n)
    a = rng.integers(0, 1 << n, size=200)
    b = rng.integers(0, 1 << n, size=200)
    hi, lo = simulate_pairs(unit, a, b)
    assert (hi == np.maximum(a, b)).all()
    assert (lo == np.minimum(a, b)).all()


def test_equal_operands_select_bit_is_zero():
    # on a tie the comparison bit is 0, so the max column carries B
    unit = build_cas(4)
    final, _ = execute_schedule(unit.schedule, operand_image(unit, 9, 9))
    sel = final.cells[:, unit.placement.result_col]
    nsel = final.cells[:, unit.placement.result_complement_col]
    assert not sel.any()
    assert nsel.all()
    assert simulate_pair(unit, 9, 9) == (9, 9)


def test_saturated_mux_case():
    unit = build_cas(4)
    assert simulate_pair(unit, 0b1111, 0b0000) == (15, 0)


@pytest.mark.parametrize("n", [2, 4, 8])
def test_input_columns_preserved_until_last_read(n):
    unit = build_cas(n)
    input_cols = {unit.placement.a_col, 1}
    last_read = {}
    first_write = {}
    clock = 0
    for cyc in unit.schedule.cycles:
        clock += cyc.clock_cycles
        for op in cyc.ops:
            for cell in op.inputs:
                if cell[1] in input_cols:
                    last_read[cell] = clock
            for cell in op.written_cells():
                if cell[1] in input_cols and cell not in first_write:
                    first_write[cell] = clock
    for cell, wcycle in first_write.items():
        assert wcycle > last_read.get(cell, 0)


def test_divergence_flags_are_reported():
    unit = build_cas(4)
    flagged = " ".join(unit.stats.divergences)
    assert "logic_cycles" in flagged
    assert "reused_init_cycles" in flagged
    # headline columns never diverge
    assert "memristors_after_init" not in flagged
    assert "reused_memristors" not in flagged


def test_trace_matches_static_recount():
    unit = build_cas(4)
    _, trace = execute_schedule(unit.schedule, operand_image(unit, 3, 12))
    assert trace == unit.schedule.stats()
    assert trace.inits == 84  # 40 fresh + 44 reused arming events
    assert trace.cycles == 40


def test_copy_cycles_count_double():
    unit = build_cas(4)
    stats = unit.schedule.stats()
    plain_cycles = sum(
        1 for cyc in unit.schedule.cycles if cyc.kind is not OpKind.COPY)
    copy_entries = sum(
        1 for cyc in unit.schedule.cycles if cyc.kind is OpKind.COPY)
    assert stats.cycles == plain_cycles + 2 * copy_entries
