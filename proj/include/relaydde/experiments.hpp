#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "relaydde/params.hpp"
#include "relaydde/return_maps.hpp"

namespace relaydde {

enum class MatchClass { RoundingConsistent, Tolerated, Mismatch };

const char* match_class_name(MatchClass cls);
MatchClass classify_match(double err);

struct QuantityMatch {
  double printed = 0.0;
  double computed = 0.0;
  double err = 0.0;
  MatchClass cls = MatchClass::Mismatch;
};

QuantityMatch make_match(double printed, double computed);

struct TableRow {
  int row = 0;  // 1-based position in the printed table
  Params params{};
  QuantityMatch first;   // |m| for table 1, |k| for table 2
  QuantityMatch second;  // b for table 1, d for table 2
  bool match = false;    // both quantities within 0.02
  double h_star = 0.0;
  bool hypotheses_ok = false;
  bool shape_ok = false;
  double sim_residual = 0.0;
  bool sim_ok = false;
  double printed_T = 0.0;
  bool suspected_mu_typo = false;
  std::string note;
};

std::vector<TableRow> reproduce_table1();
std::vector<TableRow> reproduce_table2();

struct ConvergenceRow {
  double delta = 0.0;
  double lambda = 0.0;
  double h_tilde = 0.0;
  double abs_err_m = 0.0;
  double abs_err_hstar = 0.0;
  double pred_lambda = 0.0;
  double pred_h_tilde = 0.0;
  double defect = 0.0;
  int steps = 0;
};

struct ConvergenceStudy {
  Params params{};
  double rho = 0.0;
  double h_star = 0.0;
  double m = 0.0;
  std::vector<ConvergenceRow> rows;  // leading delta=0 sentinel, then inputs in order
  // Least-squares slopes of log err against log delta over the nonzero rows.
  double fit_lambda_numeric = 0.0;
  double fit_h_numeric = 0.0;
  double fit_lambda_predicted = 0.0;
  double fit_h_predicted = 0.0;
};

ConvergenceStudy smoothing_convergence_study(const Params& params,
                                             const std::vector<double>& deltas,
                                             double rho = 1.0 / 64.0);

enum class Regime { Single, Double };

struct CrosscheckReport {
  Params params{};
  double h = 0.0;
  Regime regime = Regime::Single;
  double delta = 0.0;
  double rho = 0.0;
  int steps = 0;
  // (a) closed-form transit against the event-driven solution
  double transit_residual = 0.0;
  // (b) single: smoothed vs exact away from the exceptional set;
  //     double: antiperiodicity defect of the exact orbit on [0, 2T]
  double offwindow_residual = 0.0;
  // (c) predicted smoothed map against the probed period map (single only)
  double map_residual = 0.0;
  double exceptional_sup = 0.0;  // sup |x~ - x| over one period (single only)
  double empirical_c = 0.0;      // exceptional_sup / delta
  bool ok = false;
};

CrosscheckReport oracle_crosscheck(const Params& params, double h, Regime regime,
                                   double delta = 1e-3, double rho = 1.0 / 64.0,
                                   int steps_per_unit = 71680);

namespace detail {

// Parallel map over [0, n); results must be written by index so the gather
// order never depends on scheduling. Rethrows the first worker exception.
void parallel_for_index(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace detail

}  // namespace relaydde
