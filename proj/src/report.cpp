#include "relaydde/report.hpp"

#include <algorithm>
#include <cmath>

#include "relaydde/io_util.hpp"

namespace relaydde {

namespace {

size_t segment_index_at(const Trajectory& traj, double t) {
  size_t lo = 0, hi = traj.segments.size();
  while (hi - lo > 1) {
    size_t mid = (lo + hi) / 2;
    if (traj.segments[mid].t_start <= t) lo = mid;
    else hi = mid;
  }
  return lo;
}

std::string fmt(double v, bool fixed17) {
  return fixed17 ? format_g17(v) : format_shortest(v);
}

const char* bool_name(bool v) { return v ? "true" : "false"; }

}  // namespace

ordered_json params_json(const Params& params) {
  ordered_json j;
  j["a1"] = params.a1;
  j["a2"] = params.a2;
  j["p1"] = params.p1;
  j["p2"] = params.p2;
  j["mu"] = params.mu;
  return j;
}

ordered_json shape_report_json(const ShapeReport& report) {
  ordered_json j;
  j["kind"] = report.kind == ShapeReport::Kind::SinglePeriod ? "single" : "double";
  j["satisfied"] = report.satisfied;
  ordered_json conditions = ordered_json::array();
  for (const ConditionRecord& rec : report.details) {
    ordered_json c;
    c["name"] = rec.name;
    c["left"] = rec.left;
    c["right"] = rec.right;
    c["holds"] = rec.holds;
    conditions.push_back(c);
  }
  j["conditions"] = conditions;
  return j;
}

ordered_json table_rows_json(const std::vector<TableRow>& rows, bool is_table1) {
  ordered_json arr = ordered_json::array();
  const char* first_name = is_table1 ? "abs_m" : "abs_k";
  const char* second_name = is_table1 ? "b" : "d";
  for (const TableRow& row : rows) {
    ordered_json j;
    j["row"] = row.row;
    j["params"] = params_json(row.params);
    j[std::string("printed_") + first_name] = row.first.printed;
    j[std::string("computed_") + first_name] = row.first.computed;
    j[std::string("err_") + first_name] = row.first.err;
    j[std::string("class_") + first_name] = match_class_name(row.first.cls);
    j[std::string("printed_") + second_name] = row.second.printed;
    j[std::string("computed_") + second_name] = row.second.computed;
    j[std::string("err_") + second_name] = row.second.err;
    j[std::string("class_") + second_name] = match_class_name(row.second.cls);
    j["match"] = row.match;
    j["h_star"] = row.h_star;
    j["hypotheses_ok"] = row.hypotheses_ok;
    j["shape_ok"] = row.shape_ok;
    j["sim_residual"] = row.sim_residual;
    j["sim_ok"] = row.sim_ok;
    j["printed_T"] = row.printed_T;
    if (is_table1) j["suspected_mu_typo"] = row.suspected_mu_typo;
    j["note"] = row.note;
    arr.push_back(j);
  }
  return arr;
}

ordered_json analysis_json(const Params& params) {
  ordered_json j;
  j["params"] = params_json(params);
  AffineMap single = single_coefficients(params);
  AffineMap dbl = double_coefficients(params);
  j["m"] = single.slope;
  j["b"] = single.intercept;
  j["k"] = dbl.slope;
  j["d"] = dbl.intercept;

  bool single_ok = std::abs(single.slope) < 1.0 && single.intercept > 0.0;
  bool double_ok = std::abs(dbl.slope) < 1.0 && dbl.intercept < 0.0;
  double hs = single_ok ? single.intercept / (1.0 - single.slope) : 0.0;
  double hd = double_ok ? -dbl.intercept / (1.0 + dbl.slope) : 0.0;
  j["h_star_single"] = single_ok ? ordered_json(hs) : ordered_json(nullptr);
  j["h_star_double"] = double_ok ? ordered_json(hd) : ordered_json(nullptr);

  ordered_json mult;
  mult["single"] = single.slope;
  mult["double"] = dbl.slope * dbl.slope;
  j["multipliers"] = mult;

  ordered_json shapes;
  shapes["single"] = single_ok
                         ? shape_report_json(shape_conditions_single(params, hs))
                         : ordered_json(nullptr);
  shapes["double"] = double_ok
                         ? shape_report_json(shape_conditions_double(params, hd))
                         : ordered_json(nullptr);
  j["shape_reports"] = shapes;

  ordered_json match(nullptr);
  auto same = [&](const Params& q) {
    return q.a1 == params.a1 && q.a2 == params.a2 && q.p1 == params.p1 &&
           q.p2 == params.p2 && q.mu == params.mu;
  };
  for (const TableRow& row : reproduce_table1()) {
    if (same(row.params)) {
      match = ordered_json{{"table", 1}, {"row", row.row}};
      match["entry"] = table_rows_json({row}, true)[0];
      break;
    }
  }
  if (match.is_null()) {
    for (const TableRow& row : reproduce_table2()) {
      if (same(row.params)) {
        match = ordered_json{{"table", 2}, {"row", row.row}};
        match["entry"] = table_rows_json({row}, false)[0];
        break;
      }
    }
  }
  j["table_row_match"] = match;
  return j;
}

std::string trajectory_csv(const Trajectory& traj, int samples_per_unit) {
  if (samples_per_unit <= 0) throw OutOfRange("samples_per_unit must be positive");
  struct Row {
    double t;
    const Event* event;
  };
  std::vector<Row> rows;
  long count = std::lround(std::ceil(traj.horizon * samples_per_unit));
  for (long i = 0; i <= count; ++i) {
    double t = std::min(static_cast<double>(i) / samples_per_unit, traj.horizon);
    rows.push_back({t, nullptr});
  }
  for (const Event& ev : traj.events) rows.push_back({ev.time, &ev});
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.t < b.t; });

  std::string out = "t,x,segment_index,event\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    // Drop a plain sample that collides with an event at the same instant.
    if (!rows[i].event) {
      bool shadowed = (i > 0 && rows[i - 1].t == rows[i].t && rows[i - 1].event) ||
                      (i + 1 < rows.size() && rows[i + 1].t == rows[i].t &&
                       rows[i + 1].event);
      if (shadowed) continue;
    }
    std::string label;
    if (rows[i].event) {
      label = event_kind_name(rows[i].event->kind);
      if (rows[i].event->merged) label += "+merged";
    }
    out += format_shortest(rows[i].t);
    out += ',';
    out += format_shortest(traj.eval(rows[i].t));
    out += ',';
    out += std::to_string(segment_index_at(traj, std::min(rows[i].t, traj.horizon)));
    out += ',';
    out += csv_escape(label);
    out += '\n';
  }
  return out;
}

ordered_json event_log_json(const Trajectory& traj) {
  ordered_json j;
  j["params"] = params_json(traj.params);
  j["initial_value"] = traj.initial_value;
  j["horizon"] = traj.horizon;
  ordered_json events = ordered_json::array();
  for (const Event& ev : traj.events) {
    ordered_json e;
    e["time"] = ev.time;
    e["kind"] = event_kind_name(ev.kind);
    e["merged"] = ev.merged;
    events.push_back(e);
  }
  j["events"] = events;
  j["max_join_mismatch"] = traj.max_join_mismatch();
  return j;
}

std::string sampled_csv(const SampledTrajectory& traj, int stride) {
  if (stride <= 0) throw OutOfRange("stride must be positive");
  std::string out = "t,x\n";
  size_t last = traj.values.size() - 1;
  for (size_t i = 0; i <= last; i += stride) {
    out += format_shortest(static_cast<double>(i) * traj.step);
    out += ',';
    out += format_shortest(traj.values[i]);
    out += '\n';
  }
  if (last % stride != 0) {
    out += format_shortest(static_cast<double>(last) * traj.step);
    out += ',';
    out += format_shortest(traj.values[last]);
    out += '\n';
  }
  return out;
}

ordered_json smoothing_spec_json(const SmoothingSpec& spec) {
  ordered_json j;
  j["params"] = params_json(spec.params);
  j["delta"] = spec.delta;
  j["rho"] = spec.rho;
  j["h_star"] = spec.h_star;
  j["feedback_mixing"] = spec.f_tilde.mixing;

  auto window_json = [](const TransitionWindow& w) {
    ordered_json wj;
    wj["start"] = w.start;
    wj["v_start"] = w.v_start;
    wj["v_end"] = w.v_end;
    wj["rho"] = w.rho;
    wj["sharpness"] = w.sharpness;
    wj["mixing"] = w.mixing;
    return wj;
  };
  if (spec.a_tilde.trivial) {
    j["window1"] = nullptr;
    j["window2"] = nullptr;
  } else {
    j["window1"] = window_json(spec.a_tilde.w1);
    j["window2"] = window_json(spec.a_tilde.w2);
  }
  j["R_delta"] = spec.defect;

  ordered_json thetas;
  thetas["first"] = ordered_json{{"plus", spec.first.plus}, {"minus", spec.first.minus}};
  thetas["second"] =
      ordered_json{{"plus", spec.second.plus}, {"minus", spec.second.minus}};
  j["thetas"] = thetas;

  // Hand-assembled specs may carry parameters with no single-period fixed
  // point; the admissibility summary is undefined there.
  try {
    ordered_json adm;
    adm["max_delta"] = max_admissible_delta(spec.params);
    SingleTransit tr = single_transit(spec.params, spec.h_star);
    adm["rho_cap"] = 0.9 * std::min(tr.t1, tr.t2 + 1.0 - spec.params.p1);
    ordered_json intervals = ordered_json::array();
    for (const auto& iv : exceptional_intervals(spec))
      intervals.push_back(ordered_json::array({iv.first, iv.second}));
    adm["exceptional_intervals"] = intervals;
    j["admissibility"] = adm;
  } catch (const Error&) {
    j["admissibility"] = nullptr;
  }
  return j;
}

std::string feedback_curve_csv(const SmoothFeedback& f, int points) {
  if (points < 2) throw OutOfRange("points must be at least 2");
  std::string out = "u,f\n";
  double lo = -2.0 * f.delta, hi = 2.0 * f.delta;
  for (int i = 0; i < points; ++i) {
    double u = lo + (hi - lo) * i / (points - 1);
    out += format_shortest(u);
    out += ',';
    out += format_shortest(f(u));
    out += '\n';
  }
  return out;
}

std::string coefficient_curve_csv(const SmoothCoefficient& a, double period, int points) {
  if (points < 2) throw OutOfRange("points must be at least 2");
  std::string out = "t,a\n";
  for (int i = 0; i < points; ++i) {
    double t = period * i / (points - 1);
    out += format_shortest(t);
    out += ',';
    out += format_shortest(a(t));
    out += '\n';
  }
  return out;
}

namespace {

std::string table_csv(const std::vector<TableRow>& rows, bool is_table1, bool fixed17) {
  const char* first_name = is_table1 ? "abs_m" : "abs_k";
  const char* second_name = is_table1 ? "b" : "d";
  std::string out = "row,a1,a2,p1,p2,mu";
  for (const char* name : {first_name, second_name}) {
    out += std::string(",printed_") + name + ",computed_" + name + ",err_" + name +
           ",class_" + name;
  }
  out += ",match,h_star,hypotheses_ok,shape_ok,sim_residual,sim_ok";
  out += is_table1 ? ",coefficient_period" : ",orbit_period";
  out += ",printed_T";
  if (is_table1) out += ",suspected_mu_typo";
  out += ",note\n";

  for (const TableRow& row : rows) {
    double period = row.params.period();
    if (!is_table1) period *= 2.0;
    out += std::to_string(row.row);
    for (double v : {row.params.a1, row.params.a2, row.params.p1, row.params.p2,
                     row.params.mu}) {
      out += ',';
      out += fmt(v, fixed17);
    }
    for (const QuantityMatch* q : {&row.first, &row.second}) {
      out += ',';
      out += fmt(q->printed, fixed17);
      out += ',';
      out += fmt(q->computed, fixed17);
      out += ',';
      out += fmt(q->err, fixed17);
      out += ',';
      out += match_class_name(q->cls);
    }
    out += ',';
    out += bool_name(row.match);
    out += ',';
    out += fmt(row.h_star, fixed17);
    out += ',';
    out += bool_name(row.hypotheses_ok);
    out += ',';
    out += bool_name(row.shape_ok);
    out += ',';
    out += fmt(row.sim_residual, fixed17);
    out += ',';
    out += bool_name(row.sim_ok);
    out += ',';
    out += fmt(period, fixed17);
    out += ',';
    out += fmt(row.printed_T, fixed17);
    if (is_table1) {
      out += ',';
      out += bool_name(row.suspected_mu_typo);
    }
    out += ',';
    out += csv_escape(row.note);
    out += '\n';
  }
  return out;
}

}  // namespace

std::string table1_csv(const std::vector<TableRow>& rows, bool fixed17) {
  return table_csv(rows, true, fixed17);
}

std::string table2_csv(const std::vector<TableRow>& rows, bool fixed17) {
  return table_csv(rows, false, fixed17);
}

std::string convergence_csv(const ConvergenceStudy& study, bool fixed17) {
  std::string out =
      "delta,lambda,h_tilde,abs_err_m,abs_err_hstar,pred_lambda,pred_h_tilde,defect,"
      "steps\n";
  for (const ConvergenceRow& row : study.rows) {
    for (double v : {row.delta, row.lambda, row.h_tilde, row.abs_err_m,
                     row.abs_err_hstar, row.pred_lambda, row.pred_h_tilde,
                     row.defect}) {
      out += fmt(v, fixed17);
      out += ',';
    }
    out += std::to_string(row.steps);
    out += '\n';
  }
  return out;
}

ordered_json convergence_json(const ConvergenceStudy& study) {
  ordered_json j;
  j["params"] = params_json(study.params);
  j["rho"] = study.rho;
  j["h_star"] = study.h_star;
  j["m"] = study.m;
  ordered_json rows = ordered_json::array();
  for (const ConvergenceRow& row : study.rows) {
    ordered_json r;
    r["delta"] = row.delta;
    r["lambda"] = row.lambda;
    r["h_tilde"] = row.h_tilde;
    r["abs_err_m"] = row.abs_err_m;
    r["abs_err_hstar"] = row.abs_err_hstar;
    r["pred_lambda"] = row.pred_lambda;
    r["pred_h_tilde"] = row.pred_h_tilde;
    r["defect"] = row.defect;
    r["steps"] = row.steps;
    rows.push_back(r);
  }
  j["rows"] = rows;
  ordered_json fits;
  fits["lambda_numeric"] = study.fit_lambda_numeric;
  fits["h_numeric"] = study.fit_h_numeric;
  fits["lambda_predicted"] = study.fit_lambda_predicted;
  fits["h_predicted"] = study.fit_h_predicted;
  j["fits"] = fits;
  return j;
}

ordered_json crosscheck_json(const CrosscheckReport& report) {
  ordered_json j;
  j["params"] = params_json(report.params);
  j["h"] = report.h;
  j["regime"] = report.regime == Regime::Single ? "single" : "double";
  j["delta"] = report.delta;
  j["rho"] = report.rho;
  j["steps"] = report.steps;
  j["transit_residual"] = report.transit_residual;
  j["offwindow_residual"] = report.offwindow_residual;
  j["map_residual"] = report.map_residual;
  j["exceptional_sup"] = report.exceptional_sup;
  j["empirical_c"] = report.empirical_c;
  j["ok"] = report.ok;
  return j;
}

}  // namespace relaydde
