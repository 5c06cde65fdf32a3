import csv
import io
import json
import math
import subprocess
import sys

import pytest

from gammaprime.cli import main
from gammaprime.contab import from_counts, haldane_correct
from gammaprime.effects import summarize_table


def run(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_constants(capsys):
    code, out, _ = run(capsys, "constants")
    assert code == 0
    lines = dict(line.split() for line in out.splitlines())
    assert lines["psi_star"].startswith("1.19967864")
    assert lines["llc"].startswith("0.6627")
    assert float(lines["max_or"]) == pytest.approx(math.exp(float(lines["max_log_or"])), rel=1e-9)
    assert len(lines["llc"].split(".")[1]) == 10


def test_analyze_rows(capsys, monkeypatch, tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("n11,n12,n21,n22\n20,5,10,15\n10,10,10,10\n")
    code, out, _ = run(capsys, "analyze", str(path), "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[0]["z_uncorrected"]) == pytest.approx(2.776, abs=5e-4)
    s = summarize_table(haldane_correct(from_counts(20, 5, 10, 15)))
    # 10 significant digits survive the round trip
    assert float(rows[0]["gamma_prime"]) == pytest.approx(s.gamma_prime, rel=1e-9)
    assert float(rows[0]["log_or"]) == float(f"{s.log_or:.10g}")
    assert float(rows[1]["log_or"]) == 0.0 and float(rows[1]["p_z"]) == 1.0 and float(rows[1]["p_t"]) == 1.0


def test_analyze_no_correct(capsys, monkeypatch):
    code, out, _ = run(capsys, "analyze", "-", "--no-correct", "--format", "json",
                       stdin="20,5,10,15\n", monkeypatch=monkeypatch)
    assert code == 0
    (row,) = json.loads(out)
    assert row["z"] == pytest.approx(2.776, abs=5e-4) and row["corrected"] is False


def test_analyze_parse_error_names_line(capsys, monkeypatch):
    code, out, err = run(capsys, "analyze", "-", stdin="a,b,c,d\n", monkeypatch=monkeypatch)
    assert code == 1
    assert "line 1" in err


def test_analyze_partial_failure(capsys, monkeypatch):
    code, out, err = run(capsys, "analyze", "-", "--format", "csv",
                         stdin="n11,n12,n21,n22\n1,2,3,4\n1,2,3\n", monkeypatch=monkeypatch)
    assert code == 1 and "line 3" in err
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["error"] == "" and rows[1]["error"]


def test_analyze_missing_file(capsys):
    code, _, err = run(capsys, "analyze", "/nonexistent/file.csv")
    assert code == 2 and "error" in err


def test_posterior_dataset(capsys):
    code, out, _ = run(capsys, "posterior", "--dataset", "table4", "--pi0", "0.25", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert len(rows) == 6
    whole = rows[0]
    assert whole["gamma_prime"] == pytest.approx(-0.13, abs=0.005)
    assert whole["posterior_mean"] == pytest.approx(-0.13, abs=0.02)
    assert whole["hpd_low"] == pytest.approx(-0.20, abs=0.02)
    assert whole["hpd_high"] == pytest.approx(-0.05, abs=0.02)


def test_posterior_magnesium_covers_zero(capsys):
    code, out, _ = run(capsys, "posterior", "--or", "0.49", "--ci-low", "0.2688", "--ci-high", "0.9235",
                       "--pi0", "0.75", "--format", "json")
    (row,) = json.loads(out)
    assert row["hpd_low"] < 0 <= row["hpd_high"]
    assert row["posterior_mean"] == pytest.approx(-0.11, abs=0.02)


def test_posterior_multiple_pi0_and_point_mass(capsys):
    code, out, _ = run(capsys, "posterior", "--table", "20,5,10,15", "--pi0", "0.25,0.5", "--pi0", "1",
                       "--format", "json")
    rows = json.loads(out)
    assert [r["pi0"] for r in rows] == [0.25, 0.5, 1.0]
    assert rows[2]["posterior_mean"] == 0.0 and rows[2]["hpd_low"] == rows[2]["hpd_high"] == 0.0


def test_posterior_log_scale_and_prior_file(capsys, tmp_path):
    prior = tmp_path / "prior.csv"
    prior.write_text("midpoint,probability\n0,0.5\n-0.5,0.25\n0.5,0.25\n")
    code, out, _ = run(capsys, "posterior", "--or", "2", "--ci-low", "1", "--ci-high", "4",
                       "--prior-file", str(prior), "--scale", "logor", "--format", "json")
    (row,) = json.loads(out)
    assert code == 0 and row["scale"] == "log_or" and 0 < row["posterior_mean"] < 0.5


def test_posterior_ci_order_error(capsys, tmp_path):
    f = tmp_path / "s.csv"
    f.write_text("label,or,ci_low,ci_high,ci_level\ngood,1.5,1.1,2.0,0.95\nbad,1.5,1.8,2.0,0.95\n")
    code, out, err = run(capsys, "posterior", str(f), "--format", "csv")
    assert code == 1 and "line 3" in err
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["label"] == "good" and rows[1]["error"]


def test_posterior_usage_errors(capsys):
    assert run(capsys, "posterior")[0] == 2
    assert run(capsys, "posterior", "--or", "2")[0] == 2
    assert run(capsys, "posterior", "--dataset", "table4", "--cred", "1.5")[0] == 2
    assert run(capsys, "posterior", "--dataset", "table4", "--pi0", "2")[0] == 2


def test_simulate_outputs(capsys, tmp_path):
    prefix = tmp_path / "run"
    code, out, _ = run(capsys, "simulate", "type1", "--n-cases", "25,50", "--reps", "500",
                       "--seed", "3", "--out", str(prefix), "--format", "csv")
    assert code == 0
    assert (tmp_path / "run.csv").read_text() == out
    assert "rejection_rate_z" in (tmp_path / "run.txt").read_text()
    assert len(out.splitlines()) == 3


def test_simulate_config_file(capsys, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# power run\nn_cases = 40\nreps = 300\nor = 2\nseed = 5\n")
    code, out, _ = run(capsys, "simulate", "power", "--config", str(cfg), "--format", "csv")
    code2, out2, _ = run(capsys, "simulate", "power", "--n-cases", "40", "--reps", "300", "--or", "2",
                         "--seed", "5", "--format", "csv")
    assert code == code2 == 0 and out == out2


def test_simulate_usage_errors(capsys):
    assert run(capsys, "simulate", "type1", "--reps", "0")[0] == 2
    assert run(capsys, "simulate", "power", "--reps", "10")[0] == 2
    assert run(capsys, "simulate", "power", "--reps", "10", "--or", "-1")[0] == 2
    assert run(capsys, "simulate", "type1", "--reps", "10", "--alpha", "0")[0] == 2
    assert run(capsys, "simulate", "type1", "--n-cases", "x", "--reps", "10")[0] == 2


def test_simulate_selection_small(capsys):
    code, out, _ = run(capsys, "simulate", "selection", "--n-cases", "100", "--reps", "10",
                       "--n-tests", "50", "--format", "json")
    assert code == 0 and json.loads(out)["kind"] == "selection"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gammaprime", "constants", "--format", "csv"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.startswith("name,value")
