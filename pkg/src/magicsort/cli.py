"""Command-line front end: compile, validate, simulate and cost-report the
sorting units, bitonic networks and median filters, plus a regression run
against the bundled reference tables.

Exit codes: 0 success, 1 usage error, 2 validation/oracle failure,
3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .binary import build_cas, simulate_pairs
from .core import (
    MagicSortError,
    schedule_from_json,
    schedule_to_dict,
    schedule_to_json,
)
from .costs import (
    Comparison,
    compare_to_reference,
    estimate,
    load_reference_tables,
    reference_version,
)
from .networks import (
    BinaryMode,
    UnaryMode,
    build_bitonic,
    build_median_plan,
    map_to_partitions,
    plan_to_dict,
    simulate_median,
    simulate_network_batch,
    simulate_plan,
)
from .unary import UnaryBitStream, build_unary_cas, simulate_min_max_batch

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_IO = 0, 1, 2, 3


class UsageError(MagicSortError):
    pass


class _CliParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _meta() -> dict:
    return {"tool_version": __version__,
            "reference_tables_version": reference_version()}


def _mode_from_args(args) -> BinaryMode | UnaryMode:
    if args.mode == "binary":
        if args.dw is None:
            raise UsageError("binary mode requires --dw")
        return BinaryMode(args.dw)
    if args.len is None:
        raise UsageError("unary mode requires --len")
    return UnaryMode(args.len)


def _emit(doc: dict, fmt: str, out_path: str | None) -> None:
    if fmt == "json":
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        _render_text(doc, buf)
        text = buf.getvalue()
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _render_text(doc: dict, buf, indent: str = "") -> None:
    for key in sorted(doc):
        value = doc[key]
        if isinstance(value, dict):
            buf.write(f"{indent}{key}:\n")
            _render_text(value, buf, indent + "  ")
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            buf.write(f"{indent}{key}:\n")
            for item in value:
                _render_text(item, buf, indent + "  ")
                buf.write(f"{indent}  -\n")
        else:
            buf.write(f"{indent}{key}: {value}\n")


# ---------------------------------------------------------------------------
# Input vector files
# ---------------------------------------------------------------------------

def _read_binary_values(path: str) -> list[int]:
    values = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            values.append(int(line))
    return values


def _read_unary_streams(path: str, length: int) -> list[UnaryBitStream]:
    streams = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        stream = UnaryBitStream.from_string(line)
        if stream.length != length:
            raise MagicSortError(
                f"stream length {stream.length} does not match --len {length}")
        streams.append(stream)
    return streams


def _chunk(seq, size):
    if len(seq) % size:
        raise MagicSortError(
            f"input count {len(seq)} is not a multiple of {size}")
    return [seq[i:i + size] for i in range(0, len(seq), size)]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_cas(args) -> int:
    mode = _mode_from_args(args)
    if isinstance(mode, BinaryMode):
        unit = build_cas(mode.n)
        stats = unit.stats.as_dict()
        fragments = {
            "comparator": {"op_cycles": unit.comparator.op_cycles,
                           "init_cycles": unit.comparator.init_cycles,
                           "result_ready_cycle":
                               unit.comparator.result_ready_cycle},
            "mux": {"op_cycles": unit.mux.op_cycles,
                    "init_cycles": unit.mux.init_cycles},
        }
    else:
        unit = build_unary_cas(mode.length)
        stats = unit.stats.as_dict()
        fragments = {}
    if args.out:
        Path(args.out).write_text(schedule_to_json(unit.schedule),
                                  encoding="utf-8")
    report = estimate(unit)
    doc = {
        "meta": _meta(),
        "stats": stats,
        "placement": unit.placement.__dict__,
        "cost": report.as_dict(),
        **fragments,
    }
    if args.stats:
        Path(args.stats).write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _emit(doc, args.format, None)
    return EXIT_OK


def _cmd_sort(args) -> int:
    mode = _mode_from_args(args)
    plan = map_to_partitions(build_bitonic(args.n), mode)
    report = estimate(plan)
    doc = {
        "meta": _meta(),
        "plan": {
            "mode": mode.label,
            "n_inputs": plan.n_inputs,
            "partitions": plan.partitions,
            "dimension": list(plan.dimension),
            "cycle_account": plan.cycle_account.as_dict(),
        },
        "cost": report.as_dict(),
    }
    if args.plan:
        Path(args.plan).write_text(
            json.dumps(plan_to_dict(plan), indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
    if args.input:
        if isinstance(mode, BinaryMode):
            vectors = _chunk(_read_binary_values(args.input), args.n)
            sorted_rows = []
            for vec in vectors:
                out, _ = simulate_plan(plan, vec)
                sorted_rows.append("\n".join(str(v) for v in out))
            text = "\n".join(sorted_rows) + "\n"
        else:
            streams = _read_unary_streams(args.input, mode.length)
            vectors = _chunk([s.ones for s in streams], args.n)
            sorted_rows = []
            for vec in vectors:
                out, _ = simulate_plan(plan, vec)
                sorted_rows.append("\n".join(
                    UnaryBitStream(mode.length, v).to_string() for v in out))
            text = "\n".join(sorted_rows) + "\n"
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        doc["simulated_vectors"] = len(vectors)
    _emit(doc, args.format, args.report)
    return EXIT_OK


def _cmd_median(args) -> int:
    mode = _mode_from_args(args)
    plan = build_median_plan(mode)
    report = estimate(plan)
    doc = {
        "meta": _meta(),
        "plan": {
            "mode": mode.label,
            "partitions": plan.partitions,
            "steps": len(plan.steps),
            "dimension": list(plan.dimension),
            "cycle_account": plan.cycle_account.as_dict(),
        },
        "cost": report.as_dict(),
    }
    if args.input:
        if isinstance(mode, BinaryMode):
            windows = _chunk(_read_binary_values(args.input), 9)
            lines = []
            for win in windows:
                med, _ = simulate_median(plan, win)
                lines.append(str(med))
        else:
            streams = _read_unary_streams(args.input, mode.length)
            windows = _chunk([s.ones for s in streams], 9)
            lines = []
            for win in windows:
                med, _ = simulate_median(plan, win)
                lines.append(UnaryBitStream(mode.length, med).to_string())
        text = "\n".join(lines) + "\n"
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        doc["simulated_windows"] = len(windows)
    _emit(doc, args.format, args.report)
    return EXIT_OK


def _cmd_cost(args) -> int:
    if args.schedule:
        schedule = schedule_from_json(
            Path(args.schedule).read_text(encoding="utf-8"))
        report = estimate(schedule)
    else:
        doc = json.loads(Path(args.plan).read_text(encoding="utf-8"))
        report = estimate(doc)
    _emit({"meta": _meta(), "cost": report.as_dict()}, args.format, None)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify: embedded oracle suites
# ---------------------------------------------------------------------------

def _suite_cas4() -> tuple[int, str]:
    unit = build_cas(4)
    idx = np.arange(65536)
    a, b = (idx >> 8) % 16, idx % 16
    hi, lo = simulate_pairs(unit, a, b)
    bad = int((hi != np.maximum(a, b)).sum() + (lo != np.minimum(a, b)).sum())
    return bad, (f"cas4: 65536 pair checks sweeping all 256 operand "
                 f"combinations, {bad} mismatches")


def _suite_cas8(seed: int) -> tuple[int, str]:
    unit = build_cas(8)
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 256, size=10_000)
    b = rng.integers(0, 256, size=10_000)
    edge = np.array([0, 1, 254, 255])
    ea, eb = np.meshgrid(edge, edge, indexing="ij")
    a = np.concatenate([a, ea.ravel()])
    b = np.concatenate([b, eb.ravel()])
    hi, lo = simulate_pairs(unit, a, b)
    bad = int((hi != np.maximum(a, b)).sum() + (lo != np.minimum(a, b)).sum())
    return bad, f"cas8: {len(a)} pairs incl. boundary grid, {bad} mismatches"


def _suite_unary16() -> tuple[int, str]:
    unit = build_unary_cas(16)
    oa, ob = np.meshgrid(np.arange(17), np.arange(17), indexing="ij")
    lo, hi = simulate_min_max_batch(unit, oa.ravel(), ob.ravel())
    bad = int((lo != np.minimum(oa, ob).ravel()).sum()
              + (hi != np.maximum(oa, ob).ravel()).sum())
    return bad, f"unary16: 289 exhaustive pairs, {bad} mismatches"


def _suite_zero_one() -> tuple[int, str]:
    bad = 0
    for N in (2, 4, 8, 16):
        net = build_bitonic(N)
        count = 1 << N
        vectors = ((np.arange(count)[:, None] >> np.arange(N)) & 1)
        out = simulate_network_batch(net, vectors)
        bad += int((np.sort(vectors, axis=1) != out).sum())
    return bad, f"zero-one: all binary vectors for N in (2,4,8,16), {bad} mismatches"


def _suite_sorts(seed: int) -> tuple[int, str]:
    rng = np.random.default_rng(seed)
    bad = total = 0
    for mode in (BinaryMode(4), UnaryMode(16)):
        for N in (4, 8):
            plan = map_to_partitions(build_bitonic(N), mode)
            for _ in range(50):
                vec = rng.integers(0, mode.value_limit, size=N).tolist()
                out, _ = simulate_plan(plan, vec)
                total += 1
                if out != sorted(vec):
                    bad += 1
    return bad, f"sorts: {total} random vectors through plans, {bad} mismatches"


def _suite_median(seed: int) -> tuple[int, str]:
    rng = np.random.default_rng(seed)
    bad = 0
    plan = build_median_plan(BinaryMode(8))
    for _ in range(500):
        win = rng.integers(0, 256, size=9).tolist()
        med, _ = simulate_median(plan, win)
        if med != sorted(win)[4]:
            bad += 1
    return bad, f"median: 500 random windows, {bad} mismatches"


def _cmd_verify(args) -> int:
    suites = {
        "cas4": lambda: _suite_cas4(),
        "cas8": lambda: _suite_cas8(args.seed),
        "unary16": lambda: _suite_unary16(),
        "zero-one": lambda: _suite_zero_one(),
        "sorts": lambda: _suite_sorts(args.seed),
        "median": lambda: _suite_median(args.seed),
    }
    names = list(suites) if args.suite == "all" else [args.suite]
    failures = 0
    for name in names:
        bad, message = suites[name]()
        status = "ok" if bad == 0 else "FAIL"
        print(f"[{status}] {message}")
        failures += bad
    return EXIT_OK if failures == 0 else EXIT_CHECK


# ---------------------------------------------------------------------------
# tables: regenerate the reference comparisons
# ---------------------------------------------------------------------------

def _table_rows() -> list[tuple[str, Comparison]]:
    refs = load_reference_tables()
    rows: list[tuple[str, Comparison]] = []
    for n in refs["t1"]:
        rid = f"T1/n={n}"
        rows.append((rid, compare_to_reference(build_cas(int(n)), rid)))
    for L in refs["t3"]:
        rid = f"T3/L={L}"
        rows.append((rid, compare_to_reference(build_unary_cas(int(L)), rid)))
    for N, per_dw in refs["t2_binary"].items():
        for dw in per_dw:
            rid = f"T2/bin/N={N}/DW={dw}"
            plan = map_to_partitions(build_bitonic(int(N)), BinaryMode(int(dw)))
            rows.append((rid, compare_to_reference(plan, rid)))
    for N, row in refs["t2_unary"].items():
        for bl in row:
            if not bl.isdigit():
                continue
            rid = f"T2/unary/N={N}/BL={bl}"
            plan = map_to_partitions(build_bitonic(int(N)), UnaryMode(int(bl)))
            rows.append((rid, compare_to_reference(plan, rid)))
    rows.append(("T6/binary",
                 compare_to_reference(build_median_plan(BinaryMode(8)),
                                  "T6/binary")))
    rows.append(("T6/unary",
                 compare_to_reference(build_median_plan(UnaryMode(256)),
                                  "T6/unary")))
    return rows


def _comparison_status(cmp: Comparison) -> str:
    if not cmp.ok:
        return "FAIL"
    return "FLAG" if cmp.flagged else "PASS"


def _write_tables(rows, outdir: Path, fmt: str) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    doc = {"meta": _meta(),
           "rows": [cmp.as_dict() for _, cmp in rows]}
    (outdir / "table_comparisons.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    with (outdir / "table_comparisons.csv").open("w", newline="",
                                                 encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["reference_id", "metric", "expected", "actual",
                         "tolerance", "status", "note"])
        for rid, cmp in rows:
            for m in cmp.metrics:
                writer.writerow([rid, m.name, m.expected, m.actual,
                                 m.tolerance, m.status, m.note])
    lines = [f"reference comparison (tool {__version__}, tables "
             f"v{reference_version()})"]
    width = max(len(rid) for rid, _ in rows)
    for rid, cmp in rows:
        summary = "; ".join(
            f"{m.name}={m.actual}" + (f" vs {m.expected}" if m.status != "pass"
                                      or m.tolerance != "exact" else "")
            for m in cmp.metrics)
        lines.append(f"{_comparison_status(cmp):4} {rid:<{width}}  {summary}")
    (outdir / "table_comparisons.txt").write_text("\n".join(lines) + "\n",
                                                  encoding="utf-8")


def _write_figures(rows, outdir: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    refs = load_reference_tables()
    figdir = outdir / "figures"
    figdir.mkdir(parents=True, exist_ok=True)

    # network cycles vs size
    fig, ax = plt.subplots(figsize=(5, 3.4))
    sizes = sorted(int(N) for N in refs["t2_binary"])
    for dw in ("4", "8", "16", "32"):
        ys = [refs["t2_binary"][str(N)][dw]["cycles"] for N in sizes]
        ax.plot(sizes, ys, marker="o", label=f"binary, {dw}-bit")
    usizes = sorted(int(N) for N in refs["t2_unary"])
    ax.plot(usizes,
            [refs["t2_unary"][str(N)].get("cycles_formula",
                                          refs["t2_unary"][str(N)]["cycles"])
             for N in usizes],
            marker="s", color="k", label="unary (any length)")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("network size")
    ax.set_ylabel("processing cycles")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(figdir / "network_cycles.png", dpi=150)
    plt.close(fig)

    # estimated vs published energy for every compared row
    fig, ax = plt.subplots(figsize=(5, 3.4))
    exp, act = [], []
    for _, cmp in rows:
        for m in cmp.metrics:
            if m.name.startswith("energy") and m.rel_dev is not None:
                exp.append(float(m.expected))
                act.append(float(m.actual))
    ax.loglog(exp, act, "o", ms=4)
    lo, hi = min(exp), max(exp)
    ax.loglog([lo, hi], [lo, hi], "k--", lw=1)
    ax.set_xlabel("published energy")
    ax.set_ylabel("estimated energy")
    fig.tight_layout()
    fig.savefig(figdir / "energy_agreement.png", dpi=150)
    plt.close(fig)


def _cmd_tables(args) -> int:
    rows = _table_rows()
    outdir = Path(args.out)
    _write_tables(rows, outdir, args.format)
    if args.plot:
        _write_figures(rows, outdir)
    worst = max((_comparison_status(cmp) for _, cmp in rows),
                key=lambda s: ("PASS", "FLAG", "FAIL").index(s))
    print((outdir / "table_comparisons.txt").read_text(encoding="utf-8"),
          end="")
    return EXIT_OK if worst != "FAIL" else EXIT_CHECK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _CliParser(prog="magicsort",
                        description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_mode(p):
        p.add_argument("--mode", choices=["binary", "unary"], required=True)
        p.add_argument("--dw", type=int, help="data width (binary mode)")
        p.add_argument("--len", type=int, help="bit-stream length (unary mode)")
        p.add_argument("--format", choices=["json", "text"], default="text")

    p = sub.add_parser("cas", help="compile a compare-and-swap unit")
    add_mode(p)
    p.add_argument("--out", help="write the schedule JSON here")
    p.add_argument("--stats", help="write the stats sidecar JSON here")
    p.set_defaults(func=_cmd_cas)

    p = sub.add_parser("sort", help="build (and optionally run) a sort plan")
    add_mode(p)
    p.add_argument("--n", type=int, required=True, help="network size")
    p.add_argument("--input", help="input vector file")
    p.add_argument("--output", help="sorted output file")
    p.add_argument("--report", help="write the report here instead of stdout")
    p.add_argument("--plan", help="write the serialized plan JSON here")
    p.set_defaults(func=_cmd_sort)

    p = sub.add_parser("median", help="build (and optionally run) the 3x3 "
                                      "median plan")
    add_mode(p)
    p.add_argument("--input", help="windows file (9 values per window)")
    p.add_argument("--output", help="median output file")
    p.add_argument("--report", help="write the report here instead of stdout")
    p.set_defaults(func=_cmd_median)

    p = sub.add_parser("cost", help="cost-report a serialized schedule/plan")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--schedule")
    group.add_argument("--plan")
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.set_defaults(func=_cmd_cost)

    p = sub.add_parser("verify", help="run the embedded oracle suites")
    p.add_argument("--suite",
                   choices=["cas4", "cas8", "unary16", "zero-one", "sorts",
                            "median", "all"],
                   default="all")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("tables", help="regenerate the reference comparisons")
    p.add_argument("--out", default="reports")
    p.add_argument("--format", choices=["text", "csv", "json"], default="text")
    p.add_argument("--plot", action="store_true",
                   help="render figures next to the delimited output")
    p.set_defaults(func=_cmd_tables)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MagicSortError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
