"""Command-line behavior: reports, file round-trips, exit codes."""

import json


from magicsort.cli import main
from magicsort.unary import UnaryBitStream


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_cas_report_text(capsys):
    code, out, _ = run(capsys, "cas", "--mode", "binary", "--dw", "4")
    assert code == 0
    assert "total_cycles: 39" in out
    assert "result_ready_cycle: 23" in out
    assert "tool_version" in out


def test_cas_writes_schedule_and_stats(tmp_path, capsys):
    sched = tmp_path / "cas.json"
    stats = tmp_path / "stats.json"
    code, _, _ = run(capsys, "cas", "--mode", "unary", "--len", "16",
                     "--out", str(sched), "--stats", str(stats),
                     "--format", "json")
    assert code == 0
    doc = json.loads(sched.read_text())
    assert doc["rows"] == 16 and doc["cols"] == 5
    side = json.loads(stats.read_text())
    assert side["stats"]["operation_cycles"] == 5
    assert side["stats"]["init_cycles"] == 1


def test_sort_report_shows_table_total(capsys):
    code, out, _ = run(capsys, "sort", "--mode", "binary", "--dw", "8",
                       "--n", "8", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["plan"]["cycle_account"]["total"] == 424
    assert doc["cost"]["cycles"] == 424


def test_sort_binary_vector_file(tmp_path, capsys):
    infile = tmp_path / "in.txt"
    outfile = tmp_path / "out.txt"
    infile.write_text("\n".join(["9", "3", "14", "0", "7", "7", "2", "11"]))
    code, _, _ = run(capsys, "sort", "--mode", "binary", "--dw", "4",
                     "--n", "8", "--input", str(infile),
                     "--output", str(outfile),
                     "--report", str(tmp_path / "r.json"),
                     "--format", "json")
    assert code == 0
    values = [int(line) for line in outfile.read_text().split()]
    assert values == [0, 2, 3, 7, 7, 9, 11, 14]


def test_sort_unary_presorted_file_is_identity(tmp_path, capsys):
    streams = [UnaryBitStream(16, k).to_string() for k in (2, 5, 9, 16)]
    infile = tmp_path / "in.txt"
    outfile = tmp_path / "out.txt"
    infile.write_text("\n".join(streams) + "\n")
    code, _, _ = run(capsys, "sort", "--mode", "unary", "--len", "16",
                     "--n", "4", "--input", str(infile),
                     "--output", str(outfile),
                     "--report", str(tmp_path / "r.json"))
    assert code == 0
    assert outfile.read_text() == infile.read_text()


def test_median_windows(tmp_path, capsys):
    infile = tmp_path / "win.txt"
    outfile = tmp_path / "med.txt"
    win1 = [9, 1, 4, 200, 5, 17, 4, 3, 77]
    win2 = [8] * 9
    infile.write_text("\n".join(str(v) for v in win1 + win2))
    code, _, _ = run(capsys, "median", "--mode", "binary", "--dw", "8",
                     "--input", str(infile), "--output", str(outfile),
                     "--report", str(tmp_path / "r.json"))
    assert code == 0
    meds = [int(line) for line in outfile.read_text().split()]
    assert meds == [sorted(win1)[4], 8]


def test_cost_of_serialized_schedule(tmp_path, capsys):
    sched = tmp_path / "u.json"
    run(capsys, "cas", "--mode", "unary", "--len", "64", "--out", str(sched))
    code, out, _ = run(capsys, "cost", "--schedule", str(sched),
                       "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["cost"]["cycles"] == 6
    assert doc["cost"]["dimension"] == [64, 5]


def test_cost_of_serialized_plan(tmp_path, capsys):
    plan_file = tmp_path / "plan.json"
    run(capsys, "sort", "--mode", "binary", "--dw", "4", "--n", "8",
        "--plan", str(plan_file), "--report", str(tmp_path / "r.json"))
    code, out, _ = run(capsys, "cost", "--plan", str(plan_file),
                       "--format", "json")
    assert code == 0
    assert json.loads(out)["cost"]["cycles"] == 280


def test_reports_are_deterministic(capsys):
    _, first, _ = run(capsys, "sort", "--mode", "unary", "--len", "64",
                      "--n", "16", "--format", "json")
    _, second, _ = run(capsys, "sort", "--mode", "unary", "--len", "64",
                       "--n", "16", "--format", "json")
    assert first == second


def test_verify_quick_suites(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "unary16")
    assert code == 0
    assert "0 mismatches" in out
    code, out, _ = run(capsys, "verify", "--suite", "zero-one")
    assert code == 0


def test_usage_error_exit_code(capsys):
    assert run(capsys, "sort", "--mode", "binary")[0] == 1
    assert run(capsys, "bogus")[0] == 1
    # mode-specific parameters are validated before any work starts
    code, _, err = run(capsys, "sort", "--mode", "binary", "--n", "8")
    assert code == 1
    assert "usage error" in err


def test_oracle_failure_exit_code(capsys, monkeypatch):
    import magicsort.cli as cli
    monkeypatch.setitem(
        cli.__dict__, "_suite_unary16", lambda: (3, "unary16: forced"))
    code, out, _ = run(capsys, "verify", "--suite", "unary16")
    assert code == 2
    assert "FAIL" in out


def test_io_error_exit_code(capsys):
    code, _, err = run(capsys, "sort", "--mode", "binary", "--dw", "4",
                       "--n", "4", "--input", "/nonexistent/vectors.txt")
    assert code == 3
    assert "i/o error" in err


def test_tables_regeneration(tmp_path, capsys):
    code, out, _ = run(capsys, "tables", "--out", str(tmp_path / "rep"))
    assert code == 0
    txt = (tmp_path / "rep" / "table_comparisons.txt").read_text()
    assert "FAIL" not in txt
    assert txt.count("FLAG") == 4  # the four inconsistent unary rows
    assert (tmp_path / "rep" / "table_comparisons.csv").exists()
    doc = json.loads(
        (tmp_path / "rep" / "table_comparisons.json").read_text())
    assert doc["meta"]["reference_tables_version"] == "1"


def test_tables_figures(tmp_path, capsys):
    code, _, _ = run(capsys, "tables", "--out", str(tmp_path / "rep"),
                     "--plot")
    assert code == 0
    figdir = tmp_path / "rep" / "figures"
    assert (figdir / "network_cycles.png").stat().st_size > 0
    assert (figdir / "energy_agreement.png").stat().st_size > 0
