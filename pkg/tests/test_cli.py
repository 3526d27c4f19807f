import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from memtier.cli import OutputSpec, main
from memtier.model import ValidationError

from cli_cases import CASES, PLOTS
from conftest import DATA, GOLDEN

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(autouse=True)
def at_root(monkeypatch):
    monkeypatch.chdir(ROOT)
    monkeypatch.delenv("MEMTIER_SYSTEM", raising=False)


@pytest.mark.parametrize("name,argv,ext", CASES, ids=[c[0] for c in CASES])
def test_golden(name, argv, ext, capsys):
    assert main(argv) == 0
    assert capsys.readouterr().out == (GOLDEN / f"{name}.{ext}").read_text()


@pytest.mark.parametrize("name,argv", PLOTS, ids=[p[0] for p in PLOTS])
def test_golden_plot(name, argv, tmp_path):
    svg = tmp_path / "p.svg"
    assert main(argv + ["--out", str(tmp_path / "o"), "--plot", str(svg)]) == 0
    assert svg.read_text() == (GOLDEN / f"{name}.svg").read_text()


def test_out_file(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["curve", "tests/data/uniform_samples.csv", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[-1] == "1,1"


def test_skewed_first_row(capsys):
    main(["curve", "tests/data/skewed_samples.csv"])
    assert capsys.readouterr().out.splitlines()[1] == "0.25,0.7"


def run_err(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    assert captured.out == ""
    return code, captured.err


@pytest.mark.parametrize("argv,code", [
    (["curve", "tests/data/nope.csv"], 1),
    (["curve", "tests/data/bad_tier_samples.csv"], 1),
    (["curve", "tests/data/skewed_samples.csv", "--page-size", "1000"], 2),
    (["prefetch", "tests/data/prefetch_missing.csv"], 2),
    (["tiering", "tests/data/xsbench_phases.json", "--system", "tests/data/corrupt_system.json"], 2),
    (["tiering", "tests/data/xsbench_phases.json", "--system", "tests/data/bad_system.json"], 2),
    (["tiering", "tests/data/xsbench_phases.json", "--system", "no-such-system"], 1),
    (["lbench", "calibrate", "--threads", "2", "--levels", "60"], 3),
    (["lbench", "calibrate", "--levels", "ten"], 2),
    (["sim", "schedule"], 2),
    (["sim", "schedule", "--seed", "1", "--aware-range", "0:60"], 2),
    (["curve", "tests/data/uniform_samples.csv", "--plot", "x.png"], 2),
])
def test_error_exit_codes(argv, code, capsys):
    got, err = run_err(argv, capsys)
    assert got == code
    assert err.startswith("memtier: error:")


def test_missing_event_named(capsys):
    _, err = run_err(["prefetch", "tests/data/prefetch_missing.csv"], capsys)
    assert "USELESS_HWPF" in err


def test_validation_diagnostics_listed(capsys):
    _, err = run_err(["tiering", "tests/data/xsbench_phases.json", "--system", "tests/data/bad_system.json"], capsys)
    assert "remote bandwidth exceeds link" in err and "negative protocol overhead" in err


def test_empty_samples(tmp_path, capsys):
    path = tmp_path / "e.csv"
    path.write_text("timestamp_ns,vaddr,tier,weight\n")
    assert run_err(["curve", str(path)], capsys)[0] == 2


def test_undefined_metric_is_domain_error(tmp_path, capsys):
    path = tmp_path / "c.csv"
    path.write_text("timestamp_ns,event,value,phase\n0,PF_L2_DATA_RD,0,x\n0,PF_L2_RFO,0,x\n"
                    "0,L2_LINES_IN,5,x\n0,USELESS_HWPF,0,x\n")
    assert run_err(["prefetch", str(path)], capsys)[0] == 3


def test_system_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("MEMTIER_SYSTEM", "balanced-pool50")
    main(["tiering", "tests/data/bfs_phases.json"])
    assert "0.5,0.5,above_band" in capsys.readouterr().out


def test_schedule_runs_csv_and_determinism(tmp_path, capsys):
    argv = ["sim", "schedule", "--seed", "7", "--runs", "5", "--app", "hypre", "--app", "xsbench"]
    main(argv + ["--runs-out", str(tmp_path / "a.csv")])
    first = capsys.readouterr().out
    main(argv + ["--runs-out", str(tmp_path / "b.csv")])
    assert capsys.readouterr().out == first
    runs = (tmp_path / "a.csv").read_text()
    assert runs == (tmp_path / "b.csv").read_text()
    assert runs.splitlines()[0] == "app,policy,run,runtime_s"
    assert len(runs.splitlines()) == 1 + 2 * 2 * 5
    xs = [line for line in first.splitlines() if line.startswith("xsbench")]
    assert all(line.endswith(",0") for line in xs)


def test_sensitivity_has_level_zero(capsys):
    main(["sim", "sensitivity", "--app", "hpl", "--levels", "0,50"])
    assert "hpl,0,1" in capsys.readouterr().out.splitlines()


def test_lbench_run_reports_rates(capsys):
    assert main(["lbench", "run", "--elems", "4096", "--trials", "2", "--threads", "2", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["bytes"] == 16 * 4096 * 2
    assert doc["data_rate_bytes_per_s"] > 0


def test_output_spec_requires_svg():
    with pytest.raises(ValidationError):
        OutputSpec("csv", Path("plot.pdf"))


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "memtier", "lbench", "predict", "--nflop", "1", "--threads", "12"],
                          capture_output=True, text=True, cwd=ROOT, env={**os.environ, "MEMTIER_SYSTEM": ""})
    assert proc.returncode == 0
    assert proc.stdout == (GOLDEN / "lbench_predict.csv").read_text()
