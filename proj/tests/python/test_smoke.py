import json
import math

import pytest

relaydde = pytest.importorskip("relaydde")

H_STAR_P1 = 1.0216173412814024
M_P1 = -0.72165206678037185


def test_params_and_return_maps():
    p = relaydde.preset("p1")
    assert p.period() == 4.0
    single = relaydde.single_coefficients(p)
    assert math.isclose(single.slope, M_P1, rel_tol=1e-12)
    assert math.isclose(single.intercept, 1.7588696070757950, rel_tol=1e-12)
    assert math.isclose(single.apply(1.0), M_P1 + 1.7588696070757950, rel_tol=1e-12)

    fp = relaydde.fixed_point_single(p)
    assert math.isclose(fp.h_star, H_STAR_P1, rel_tol=1e-12)
    assert fp.stable
    assert fp.shape.satisfied
    assert len(fp.shape.conditions) == 6

    with pytest.raises(ValueError):
        relaydde.Params(-1.0, 0.1, 3.0, 1.0, 0.1)
    with pytest.raises(relaydde.HypothesisFailedError):
        relaydde.fixed_point_single(relaydde.Params(2.0, 2.0, 2.0, 1.0, 0.2))


def test_exact_solution_returns_to_the_fixed_point():
    p = relaydde.preset("p1")
    tr = relaydde.solve_exact(p, H_STAR_P1, 8.0)
    assert math.isclose(tr.eval(4.0), H_STAR_P1, rel_tol=1e-12)
    assert math.isclose(tr.eval(8.0), H_STAR_P1, rel_tol=1e-12)
    kinds = [e.kind for e in tr.events]
    assert kinds.count("ZeroCrossing") == 4
    csv = relaydde.trajectory_csv(tr, samples_per_unit=8)
    assert csv.startswith("t,x,segment_index,event\n")


def test_double_regime_orbit_is_antiperiodic():
    p = relaydde.preset("p2")
    dbl = relaydde.double_coefficients(p)
    h_star = -dbl.intercept / (1.0 + dbl.slope)
    assert math.isclose(h_star, 1.8885616160064442, rel_tol=1e-12)
    tr = relaydde.solve_exact(p, h_star, 3.0)
    assert math.isclose(tr.eval(1.5), -h_star, rel_tol=1e-9)
    assert math.isclose(tr.eval(3.0), h_star, rel_tol=1e-9)


def test_smoothing_and_numeric_fixed_point():
    p = relaydde.preset("p1")
    spec = relaydde.build_smoothing_spec(p, 1e-2)
    assert math.isclose(spec.h_star, H_STAR_P1, rel_tol=1e-12)
    assert math.isclose(spec.feedback_mixing, 0.00015625, rel_tol=1e-9)
    assert spec.f(0.0) == spec.feedback_mixing
    assert spec.f(0.02) == -1.0
    assert spec.f(-0.02) == 1.0
    assert spec.a(0.5) == p.a1
    assert spec.a(3.5) == p.a2

    n = relaydde.align_steps(spec, 100)
    assert n == 2048
    search = relaydde.find_fixed_point_numeric(spec, n, spec.h_star)
    predicted = relaydde.predicted_fixed_point(p, 1e-2)
    assert math.isclose(predicted, 1.0216174194824255, rel_tol=1e-12)
    assert abs(search.h - predicted) < 1e-5
    assert search.residual < 1e-9

    lam = relaydde.estimate_lambda(spec, search.h, n)
    assert abs(lam - M_P1) < 1e-4

    with pytest.raises(relaydde.DeltaTooLargeError):
        relaydde.build_smoothing_spec(p, 0.5)


def test_json_reports_round_trip():
    p = relaydde.preset("p1")
    report = json.loads(relaydde.analysis_json(p))
    assert report["table_row_match"]["row"] == 1
    assert math.isclose(report["h_star_single"], H_STAR_P1, rel_tol=1e-12)

    rows = json.loads(relaydde.table1_rows_json())
    assert len(rows) == 22
    assert all(r["match"] for r in rows)
    rows2 = json.loads(relaydde.table2_rows_json())
    assert len(rows2) == 18
    assert all(r["sim_ok"] for r in rows2)

    csv = relaydde.table1_csv()
    assert csv.splitlines()[0].startswith("row,a1,a2,p1,p2,mu,printed_abs_m")
