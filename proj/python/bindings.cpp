#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "relaydde/dde_integrator.hpp"
#include "relaydde/exact_solver.hpp"
#include "relaydde/io_util.hpp"
#include "relaydde/experiments.hpp"
#include "relaydde/params.hpp"
#include "relaydde/report.hpp"
#include "relaydde/return_maps.hpp"
#include "relaydde/smoothing.hpp"

namespace py = pybind11;
using namespace relaydde;

PYBIND11_MODULE(_relaydde, m) {
  m.doc() =
      "Exact and smoothed analysis of x'(t) = -mu x(t) + a(t) f(x(t-1)) with a "
      "two-step periodic coefficient and relay feedback";

  // Specific failures are registered after the base class so their
  // translators run first.
  py::register_exception<Error>(m, "RelayError", PyExc_RuntimeError);
  py::register_exception<InvalidParameters>(m, "InvalidParametersError",
                                            PyExc_ValueError);
  py::register_exception<HypothesisFailed>(m, "HypothesisFailedError");
  py::register_exception<ShapeFailed>(m, "ShapeFailedError");
  py::register_exception<DeltaTooLarge>(m, "DeltaTooLargeError");
  py::register_exception<WindowTooWide>(m, "WindowTooWideError");
  py::register_exception<GridMisaligned>(m, "GridMisalignedError");
  py::register_exception<NoConvergence>(m, "NoConvergenceError");

  py::class_<Params>(m, "Params")
      .def(py::init([](double a1, double a2, double p1, double p2, double mu) {
             return validate_params(a1, a2, p1, p2, mu);
           }),
           py::arg("a1"), py::arg("a2"), py::arg("p1"), py::arg("p2"), py::arg("mu"))
      .def_readonly("a1", &Params::a1)
      .def_readonly("a2", &Params::a2)
      .def_readonly("p1", &Params::p1)
      .def_readonly("p2", &Params::p2)
      .def_readonly("mu", &Params::mu)
      .def("period", &Params::period)
      .def("__repr__", [](const Params& p) {
        return "Params(a1=" + format_shortest(p.a1) + ", a2=" + format_shortest(p.a2) +
               ", p1=" + format_shortest(p.p1) + ", p2=" + format_shortest(p.p2) +
               ", mu=" + format_shortest(p.mu) + ")";
      });

  m.def("coefficient_at", &coefficient_at, py::arg("params"), py::arg("t"),
        "periodic step coefficient a(t)");

  py::class_<AffineMap>(m, "AffineMap")
      .def_readonly("slope", &AffineMap::slope)
      .def_readonly("intercept", &AffineMap::intercept)
      .def("apply", &AffineMap::apply, py::arg("h"))
      .def("__repr__", [](const AffineMap& a) {
        return "AffineMap(slope=" + format_shortest(a.slope) +
               ", intercept=" + format_shortest(a.intercept) + ")";
      });

  py::class_<ConditionRecord>(m, "ConditionRecord")
      .def_readonly("name", &ConditionRecord::name)
      .def_readonly("left", &ConditionRecord::left)
      .def_readonly("right", &ConditionRecord::right)
      .def_readonly("holds", &ConditionRecord::holds);

  py::class_<ShapeReport>(m, "ShapeReport")
      .def_readonly("satisfied", &ShapeReport::satisfied)
      .def_readonly("conditions", &ShapeReport::details);

  py::class_<FixedPointResult>(m, "FixedPointResult")
      .def_readonly("h_star", &FixedPointResult::h_star)
      .def_readonly("multiplier", &FixedPointResult::multiplier)
      .def_readonly("stable", &FixedPointResult::stable)
      .def_readonly("shape", &FixedPointResult::shape);

  m.def("single_coefficients", &single_coefficients, py::arg("params"),
        "slope m and intercept b of the one-period return map");
  m.def("double_coefficients", &double_coefficients, py::arg("params"),
        "slope k and intercept d of the half-cycle map");
  m.def("shape_conditions_single", &shape_conditions_single, py::arg("params"),
        py::arg("h"));
  m.def("shape_conditions_double", &shape_conditions_double, py::arg("params"),
        py::arg("h"));
  m.def("fixed_point_single", &fixed_point_single, py::arg("params"));
  m.def("fixed_point_double", &fixed_point_double, py::arg("params"));

  py::class_<Event>(m, "Event")
      .def_readonly("time", &Event::time)
      .def_readonly("merged", &Event::merged)
      .def_property_readonly(
          "kind", [](const Event& e) { return std::string(event_kind_name(e.kind)); });

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("initial_value", &Trajectory::initial_value)
      .def_readonly("horizon", &Trajectory::horizon)
      .def_readonly("events", &Trajectory::events)
      .def("eval", &Trajectory::eval, py::arg("t"))
      .def("segment_count",
           [](const Trajectory& tr) { return tr.segments.size(); });

  m.def("solve_exact", &solve_exact, py::arg("params"), py::arg("h"),
        py::arg("horizon"),
        "event-driven piecewise-exponential solution from a constant history");

  py::class_<SmoothingSpec>(m, "SmoothingSpec")
      .def_readonly("params", &SmoothingSpec::params)
      .def_readonly("delta", &SmoothingSpec::delta)
      .def_readonly("rho", &SmoothingSpec::rho)
      .def_readonly("h_star", &SmoothingSpec::h_star)
      .def_readonly("defect", &SmoothingSpec::defect)
      .def_property_readonly(
          "feedback_mixing",
          [](const SmoothingSpec& s) { return s.f_tilde.mixing; })
      .def("f", [](const SmoothingSpec& s, double u) { return s.f_tilde(u); },
           py::arg("u"), "smoothed feedback value")
      .def("a", [](const SmoothingSpec& s, double t) { return s.a_tilde(t); },
           py::arg("t"), "smoothed coefficient value");

  m.def("build_smoothing_spec", &build_smoothing_spec, py::arg("params"),
        py::arg("delta"), py::arg("rho") = 1.0 / 64.0);
  m.def("max_admissible_delta", &max_admissible_delta, py::arg("params"));
  m.def("f_tilde_map_predict", &f_tilde_map_predict, py::arg("params"),
        py::arg("delta"), "first-order prediction of the smoothed return map");
  m.def("predicted_fixed_point", &predicted_fixed_point, py::arg("params"),
        py::arg("delta"));

  py::class_<SampledTrajectory>(m, "SampledTrajectory")
      .def_readonly("step", &SampledTrajectory::step)
      .def_readonly("horizon", &SampledTrajectory::horizon)
      .def_readonly("values", &SampledTrajectory::values)
      .def("eval", &SampledTrajectory::eval, py::arg("t"));

  m.def("align_steps", &align_steps, py::arg("spec"), py::arg("requested"));
  m.def("integrate_smoothed", &integrate_smoothed, py::arg("spec"), py::arg("h"),
        py::arg("t_end"), py::arg("steps_per_unit"));
  m.def("period_map", &period_map, py::arg("spec"), py::arg("h"),
        py::arg("steps_per_unit"));
  m.def("estimate_lambda", &estimate_lambda, py::arg("spec"), py::arg("h_center"),
        py::arg("steps_per_unit"));

  py::class_<FixedPointSearch>(m, "FixedPointSearch")
      .def_readonly("h", &FixedPointSearch::h)
      .def_readonly("residual", &FixedPointSearch::residual)
      .def_readonly("iterations", &FixedPointSearch::iterations);

  m.def("find_fixed_point_numeric", &find_fixed_point_numeric, py::arg("spec"),
        py::arg("steps_per_unit"), py::arg("h_start"));

  // Reports come back as JSON or CSV text; parse with the json module.
  m.def("analysis_json",
        [](const Params& p) { return analysis_json(p).dump(2); }, py::arg("params"));
  m.def("smoothing_spec_json",
        [](const SmoothingSpec& s) { return smoothing_spec_json(s).dump(2); },
        py::arg("spec"));
  m.def("table1_rows_json",
        []() { return table_rows_json(reproduce_table1(), true).dump(2); });
  m.def("table2_rows_json",
        []() { return table_rows_json(reproduce_table2(), false).dump(2); });
  m.def("table1_csv",
        [](bool fixed17) { return table1_csv(reproduce_table1(), fixed17); },
        py::arg("fixed17") = false);
  m.def("table2_csv",
        [](bool fixed17) { return table2_csv(reproduce_table2(), fixed17); },
        py::arg("fixed17") = false);
  m.def(
      "convergence_study_json",
      [](const Params& p, const std::vector<double>& deltas, double rho) {
        return convergence_json(smoothing_convergence_study(p, deltas, rho)).dump(2);
      },
      py::arg("params"), py::arg("deltas"), py::arg("rho") = 1.0 / 64.0);
  m.def(
      "trajectory_csv",
      [](const Trajectory& tr, int samples_per_unit) {
        return trajectory_csv(tr, samples_per_unit);
      },
      py::arg("trajectory"), py::arg("samples_per_unit") = 32);
}
