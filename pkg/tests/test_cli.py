"""CLI harness: exit codes, CSV schema, determinism, config round-trips."""

import io
import textwrap
from contextlib import redirect_stderr, redirect_stdout

import pytest

from macsim.cli import (
    CSV_HEADER,
    ExperimentConfig,
    config_from_mapping,
    main,
    parse_config_file,
)


def run_cli(argv):
    out = io.StringIO()
    err = io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


FAST = ["--K", "200", "--stage-cap", "30", "--round-cap", "100000"]


def test_run_emits_one_summary_row():
    code, out, _ = run_cli(
        ["run", "--algorithm", "queue-backoff", "--n", "10", "--rho", "0.5",
         "--seed", "1", "--K", "1000", "--stage-cap", "100", "--round-cap", "500000"]
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == CSV_HEADER
    fields = lines[1].split(",")
    assert fields[0] == "queue-backoff"
    assert fields[6] == "stabilized"
    assert float(fields[7]) > 0


def test_run_incompatible_algorithm_exits_2():
    code, _, err = run_cli(
        ["run", "--algorithm", "srr", "--n", "10", "--rho", "0.5", "--no-collision-detection"]
    )
    assert code == 2
    assert "collision detection" in err


def test_run_same_seed_byte_identical():
    argv = ["run", "--algorithm", "rrw", "--n", "4", "--rho", "0.6", "--seed", "3"] + FAST
    a = run_cli(argv)
    b = run_cli(argv)
    assert a == b


def test_run_unstable_has_empty_avg_latency(tmp_path):
    code, out, _ = run_cli(
        ["run", "--algorithm", "counting-backoff", "--n", "10", "--rho", "0.7",
         "--seed", "0", "--K", "200", "--stage-cap", "10", "--round-cap", "30000"]
    )
    assert code == 0
    row = out.strip().splitlines()[1].split(",")
    assert row[6] == "unstable"
    assert row[7] == ""


def test_run_writes_stage_csv(tmp_path):
    stages = tmp_path / "stages.csv"
    code, _, _ = run_cli(
        ["run", "--algorithm", "rrw", "--n", "4", "--rho", "0.5", "--seed", "1",
         "--stages", str(stages)] + FAST
    )
    assert code == 0
    lines = stages.read_text().splitlines()
    assert lines[0] == "stage,avg_latency"
    assert len(lines) >= 5


def test_config_file_round_trip(tmp_path):
    cfg = ExperimentConfig(
        algorithm="srr",
        n=8,
        rho="0.75",
        beta="5",
        collision_detection=True,
        seed=9,
        k=123,
        stage_cap=7,
        round_cap=999,
        adversary="randomized-individual",
        rates=("0.25", "0.25", "0.125", "0.125", "0", "0", "0", "0"),
    )
    text = cfg.emit()
    parsed = config_from_mapping(parse_config_file(text))
    assert parsed == cfg


def test_config_file_with_flag_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("algorithm = rrw\nn = 4\nrho = 0.5\nseed = 1\n")
    argv = ["run", "--config", str(path), "--rho", "0.6"] + FAST
    code, out, _ = run_cli(argv)
    assert code == 0
    assert out.strip().splitlines()[1].split(",")[2] == "0.600000"


def test_env_seed_fallback(monkeypatch):
    monkeypatch.setenv("MACSIM_SEED", "7")
    code, out, _ = run_cli(["run", "--algorithm", "rrw", "--n", "4", "--rho", "0.5"] + FAST)
    assert code == 0
    assert out.strip().splitlines()[1].split(",")[4] == "7"


def test_missing_required_key_exits_2():
    code, _, err = run_cli(["run", "--algorithm", "rrw", "--n", "4"] + FAST)
    assert code == 2
    assert "rho" in err


def test_sweep_sorted_and_parallel_identical(tmp_path):
    out1 = tmp_path / "a.csv"
    out8 = tmp_path / "b.csv"
    base = [
        "sweep", "--algorithms", "rrw,mbtf", "--rhos", "0.6,0.3", "--ns", "4",
        "--seeds", "2", "--K", "100", "--stage-cap", "20", "--round-cap", "50000",
    ]
    code1, _, _ = run_cli(base + ["--out", str(out1), "--jobs", "1"])
    code8, _, _ = run_cli(base + ["--out", str(out8), "--jobs", "8"])
    assert code1 == code8 == 0
    assert out1.read_bytes() == out8.read_bytes()
    rows = out1.read_text().splitlines()
    assert rows[0] == CSV_HEADER
    # sorted by (algorithm, n, rho, seed): mbtf before rrw, 0.3 before 0.6
    keys = [tuple(r.split(",")[:5]) for r in rows[1:]]
    assert keys == sorted(keys)
    assert keys[0][0] == "mbtf" and keys[0][2] == "0.300000"


def test_sweep_empty_algorithm_list_header_only(tmp_path):
    out = tmp_path / "empty.csv"
    code, _, _ = run_cli(
        ["sweep", "--algorithms", "", "--rhos", "0.5", "--ns", "4", "--out", str(out)]
    )
    assert code == 0
    assert out.read_text() == CSV_HEADER + "\n"


def test_sweep_cell_failure_recorded_and_continues(tmp_path):
    out = tmp_path / "mixed.csv"
    # srr without collision detection fails per-cell; rrw succeeds.
    code, _, _ = run_cli(
        ["sweep", "--algorithms", "rrw,srr", "--rhos", "0.5", "--ns", "4",
         "--seeds", "1", "--K", "100", "--stage-cap", "10", "--round-cap", "20000",
         "--no-collision-detection", "--out", str(out)]
    )
    assert code == 0
    rows = out.read_text().splitlines()[1:]
    verdicts = {r.split(",")[0]: r.split(",")[6] for r in rows}
    assert verdicts["srr"].startswith("error:")
    assert verdicts["rrw"] in ("stabilized", "unstable")


def test_verify_bounds_cli_pass_and_out_of_range():
    code, out, _ = run_cli(
        ["verify-bounds", "--theorem", "rrw-individual", "--n", "4", "--rho", "0.5",
         "--beta", "10", "--seeds", "2", "--horizon", "3000"]
    )
    assert code == 0
    assert out.strip().endswith("PASS")
    code, _, err = run_cli(
        ["verify-bounds", "--theorem", "quadruple", "--n", "4", "--rho", "0.5", "--seeds", "1"]
    )
    assert code == 2
    assert "3/7" in err


def test_check_adversary_cli(tmp_path):
    good = tmp_path / "good.trace"
    good.write_text("10\n1\n0\n0\n")
    code, out, _ = run_cli(["check-adversary", str(good), "--rho", "0.5", "--beta", "10"])
    assert code == 0 and "admissible" in out

    bad = tmp_path / "bad.trace"
    bad.write_text("11\n0\n0\n")
    code, out, _ = run_cli(["check-adversary", str(bad), "--rho", "0.5", "--beta", "10"])
    assert code == 1
    assert "[0, 0]" in out

    ugly = tmp_path / "ugly.trace"
    ugly.write_text("not-a-count\n")
    code, _, err = run_cli(["check-adversary", str(ugly), "--rho", "0.5", "--beta", "10"])
    assert code == 2


def test_check_adversary_individual(tmp_path):
    trace = tmp_path / "ind.trace"
    trace.write_text("0:1,1:1\n\n0:1\n")
    code, out, _ = run_cli(
        ["check-adversary", str(trace), "--rates", "0.5,0.25", "--beta", "2"]
    )
    assert code == 0
