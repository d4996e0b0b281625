#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "relaydde/dde_integrator.hpp"
#include "relaydde/exact_solver.hpp"
#include "relaydde/experiments.hpp"
#include "relaydde/smoothing.hpp"

namespace relaydde {

using ordered_json = nlohmann::ordered_json;

ordered_json params_json(const Params& params);
ordered_json shape_report_json(const ShapeReport& report);

// Full analysis of one parameter set: both affine maps, fixed points where the
// hypotheses hold, shape reports at the fixed points, and the matching printed
// table row if the parameters appear in one of the tables.
ordered_json analysis_json(const Params& params);

std::string trajectory_csv(const Trajectory& traj, int samples_per_unit);
ordered_json event_log_json(const Trajectory& traj);

std::string sampled_csv(const SampledTrajectory& traj, int stride);

ordered_json smoothing_spec_json(const SmoothingSpec& spec);
std::string feedback_curve_csv(const SmoothFeedback& f, int points);
std::string coefficient_curve_csv(const SmoothCoefficient& a, double period, int points);

// fixed17 switches every float to 17 significant digits (golden fixture style);
// reports default to the shortest round-trip form.
std::string table1_csv(const std::vector<TableRow>& rows, bool fixed17 = false);
std::string table2_csv(const std::vector<TableRow>& rows, bool fixed17 = false);
std::string convergence_csv(const ConvergenceStudy& study, bool fixed17 = false);

ordered_json table_rows_json(const std::vector<TableRow>& rows, bool is_table1);
ordered_json convergence_json(const ConvergenceStudy& study);
ordered_json crosscheck_json(const CrosscheckReport& report);

}  // namespace relaydde
