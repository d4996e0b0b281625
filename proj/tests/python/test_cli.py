import csv
import io
import json
import math
import os
import subprocess

import pytest

CLI = os.environ.get("RELAYDDE_CLI")

pytestmark = pytest.mark.skipif(CLI is None, reason="RELAYDDE_CLI not set")

P1 = ["--preset", "p1"]
H_STAR_P1 = 1.0216173412814024
M_P1 = -0.72165206678037185


def run(*args, **kwargs):
    return subprocess.run([CLI, *args], capture_output=True, text=True, **kwargs)


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_analyze_report_and_regime_exit_codes():
    r = run("analyze", *P1)
    assert r.returncode == 0
    report = json.loads(r.stdout)
    assert report["params"] == {"a1": 2.0, "a2": 0.1, "p1": 3.0, "p2": 1.0, "mu": 0.1}
    assert math.isclose(report["m"], M_P1, rel_tol=1e-12)
    assert math.isclose(report["b"], 1.7588696070757950, rel_tol=1e-12)
    assert math.isclose(report["h_star_single"], H_STAR_P1, rel_tol=1e-12)
    assert report["table_row_match"]["table"] == 1
    assert report["table_row_match"]["row"] == 1
    assert all(c["holds"] for c in report["shape_reports"]["single"]["conditions"])

    assert run("analyze", "--preset", "p2", "--regime", "double").returncode == 0

    # Equal steps give a negative intercept, so the single-period hypotheses
    # fail; the report still prints, with a null fixed point.
    r = run("analyze", "--a1", "2", "--a2", "2", "--p1", "2", "--p2", "1",
            "--mu", "0.2", "--regime", "single")
    assert r.returncode == 2
    assert json.loads(r.stdout)["h_star_single"] is None


def test_analyze_input_validation():
    r = run("analyze", "--a1", "0", "--a2", "1", "--p1", "2", "--p2", "1", "--mu", "0.1")
    assert r.returncode == 1
    assert "a1 must be > 0" in r.stderr

    # Parameter sources are mutually exclusive.
    assert run("analyze", "--preset", "p1", "--a1", "2").returncode == 1
    # No parameters at all.
    assert run("analyze").returncode == 1


def test_config_file_matches_preset(tmp_path):
    cfg = tmp_path / "params.cfg"
    cfg.write_text("# the single-period example\na1 = 2\na2 = 0.1\np1 = 3\np2 = 1\nmu = 0.1\n")
    from_cfg = run("analyze", "--config", str(cfg))
    from_preset = run("analyze", *P1)
    assert from_cfg.returncode == 0
    assert from_cfg.stdout == from_preset.stdout

    bad = tmp_path / "bad.cfg"
    bad.write_text("a1 = 2\n")
    assert run("analyze", "--config", str(bad)).returncode == 1
    assert run("analyze", "--config", str(tmp_path / "absent.cfg")).returncode == 1


def test_simulate_exact_returns_to_fixed_point():
    r = run("simulate", *P1, "--exact", "--h", "auto", "--periods", "2")
    assert r.returncode == 0
    lines = r.stdout.splitlines()
    assert lines[0] == "t,x,segment_index,event"
    rows = rows_of(r.stdout)
    by_time = {row["t"]: row for row in rows}
    assert math.isclose(float(by_time["4"]["x"]), H_STAR_P1, rel_tol=1e-9)
    assert math.isclose(float(by_time["8"]["x"]), H_STAR_P1, rel_tol=1e-9)
    assert sum(1 for row in rows if row["event"] == "ZeroCrossing") == 4
    assert sum(1 for row in rows if row["event"] == "CoefficientSwitch") == 3


def test_simulate_negated_history_mirrors_the_trajectory():
    up = run("simulate", *P1, "--exact", "--h", "1", "--samples", "16")
    down = run("simulate", *P1, "--exact", "--h", "-1", "--samples", "16")
    assert up.returncode == 0 and down.returncode == 0
    rows_up = rows_of(up.stdout)
    rows_down = rows_of(down.stdout)
    assert len(rows_up) == len(rows_down)
    for a, b in zip(rows_up, rows_down):
        assert a["t"] == b["t"]
        assert a["event"] == b["event"]
        assert float(b["x"]) == -float(a["x"])


def test_simulate_smoothed_lands_near_the_fixed_point():
    r = run("simulate", *P1, "--smoothed", "--h", "auto", "--delta", "1e-2",
            "--step", "2048", "--stride", "256")
    assert r.returncode == 0
    lines = r.stdout.splitlines()
    assert lines[0] == "t,x"
    last_t, last_x = lines[-1].split(",")
    assert last_t == "4"
    assert abs(float(last_x) - H_STAR_P1) < 1e-4

    # The smoothed path approximates the single-period orbit only.
    r = run("simulate", *P1, "--smoothed", "--regime", "double", "--delta", "1e-2")
    assert r.returncode == 1


def test_simulate_event_log(tmp_path):
    out = tmp_path / "tr.csv"
    ev = tmp_path / "ev.json"
    r = run("simulate", *P1, "--exact", "--h", "auto", "--out", str(out),
            "--json-events", str(ev))
    assert r.returncode == 0
    log = json.loads(ev.read_text())
    kinds = [e["kind"] for e in log["events"]]
    assert kinds.count("ZeroCrossing") == 2
    assert kinds.count("CoefficientSwitch") == 1
    assert kinds.count("DelayedSignSwitch") == 2
    assert log["max_join_mismatch"] <= 1e-12
    assert out.read_text().startswith("t,x,segment_index,event\n")


def test_simulate_rejects_bad_h():
    assert run("simulate", *P1, "--exact", "--h", "fast").returncode == 1


def test_smooth_spec_and_curves(tmp_path):
    fcsv = tmp_path / "f.csv"
    acsv = tmp_path / "a.csv"
    r = run("smooth", *P1, "--delta", "1e-3", "--feedback-csv", str(fcsv),
            "--coefficient-csv", str(acsv))
    assert r.returncode == 0
    spec = json.loads(r.stdout)
    assert spec["delta"] == 1e-3
    assert spec["rho"] == 1.0 / 64.0
    assert math.isclose(spec["h_star"], H_STAR_P1, rel_tol=1e-12)
    # Mixing weight for the feedback cap scales linearly in delta here.
    assert math.isclose(spec["feedback_mixing"], 1.5625e-05, rel_tol=1e-6)
    assert math.isclose(spec["R_delta"], 1.4285e-09, rel_tol=1e-3)
    assert math.isclose(spec["window1"]["mixing"], 0.687, abs_tol=0.02)
    assert len(spec["admissibility"]["exceptional_intervals"]) == 4
    assert 0.37 < spec["admissibility"]["max_delta"] < 0.39

    assert fcsv.read_text().startswith("u,f\n")
    assert acsv.read_text().startswith("t,a\n")

    # Half-widths beyond the admissible bound are refused.
    assert run("smooth", *P1, "--delta", "0.5").returncode == 2


def test_sweep_tables():
    r1 = run("sweep", "--table", "1")
    assert r1.returncode == 0
    rows = rows_of(r1.stdout)
    assert len(rows) == 22
    assert all(row["match"] == "true" for row in rows)
    loose = [row["row"] for row in rows
             if "tolerated" in (row["class_abs_m"], row["class_b"])]
    assert loose == ["9", "10", "14", "20"]
    assert sum(1 for row in rows if row["suspected_mu_typo"] == "true") == 2

    r2 = run("sweep", "--table", "2")
    assert r2.returncode == 0
    rows = rows_of(r2.stdout)
    assert len(rows) == 18
    assert all(row["match"] == "true" for row in rows)
    assert all(row["sim_ok"] == "true" for row in rows)
    assert rows[0]["class_d"] == "tolerated"

    assert run("sweep", "--table", "3").returncode == 1


def test_sweep_json(tmp_path):
    out = tmp_path / "t1.json"
    r = run("sweep", "--table", "1", "--json", str(out), "--out", str(tmp_path / "t1.csv"))
    assert r.returncode == 0
    rows = json.loads(out.read_text())
    assert len(rows) == 22
    assert math.isclose(rows[0]["computed_abs_m"], -M_P1, rel_tol=1e-12)


def test_verify_writes_reports_and_gates(tmp_path):
    out = tmp_path / "reports"
    r = run("verify", *P1, "--deltas", "1e-2,1e-3", "--out-dir", str(out))
    assert r.returncode == 0, r.stderr
    for name in ("table1_report.csv", "table2_report.csv",
                 "convergence_report.csv", "summary.json"):
        assert (out / name).is_file()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["ok"] is True
    assert summary["tables"]["table1"]["all_match"] is True
    assert summary["tables"]["table2"]["all_match"] is True
    assert summary["convergence"]["lambda_envelope"] <= 1e-7
    assert summary["crosschecks"]["single"]["ok"] is True
    assert summary["crosschecks"]["double"]["ok"] is True
    conv = (out / "convergence_report.csv").read_text().splitlines()
    assert len(conv) == 4  # header, relay sentinel, two smoothing levels
    assert conv[0].startswith("delta,lambda,h_tilde,abs_err_m,abs_err_hstar")


def test_outputs_are_bit_identical_across_runs(tmp_path):
    a = run("sweep", "--table", "1", "--fixed17")
    b = run("sweep", "--table", "1", "--fixed17")
    assert a.stdout == b.stdout

    d1, d2 = tmp_path / "v1", tmp_path / "v2"
    for d in (d1, d2):
        assert run("verify", *P1, "--deltas", "1e-2", "--out-dir", str(d)).returncode == 0
    for name in ("table1_report.csv", "table2_report.csv",
                 "convergence_report.csv", "summary.json"):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()
