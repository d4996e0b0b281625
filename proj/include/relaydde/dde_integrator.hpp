#pragma once

#include <vector>

#include "relaydde/smoothing.hpp"

namespace relaydde {

// Fixed-step numeric solution of x'(t) = -mu x + a~(t) f~(x(t-1)) with the
// constant history x = h on [-1, 0]. Nodes sit at i/steps_per_unit so the
// delay is exactly steps_per_unit nodes; values between nodes come from
// cubic Hermite interpolation on the stored (value, derivative) pairs.
struct SampledTrajectory {
  double step;
  double horizon;
  double history_value;
  std::vector<double> values;       // node values, one per grid point
  std::vector<double> derivatives;  // right-hand side at each node

  // t <= 0 returns the history; t in (0, horizon] interpolates; beyond
  // the horizon throws OutOfRange.
  double eval(double t) const;
};

// Smallest steps-per-unit count n >= requested (and >= 100) for which
// n*p1, n*p2, n*rho and the two window break offsets n*s*rho are integers
// within relative tolerance 1e-9. Counts above 1e6 raise GridMisaligned.
int align_steps(const SmoothingSpec& spec, int requested);

// Classical fixed-step RK4 over [0, t_end]; t_end must land on the grid.
SampledTrajectory integrate_smoothed(const SmoothingSpec& spec, double h, double t_end,
                                     int steps_per_unit);

// One period of the smoothed flow: h -> x(T).
double period_map(const SmoothingSpec& spec, double h, int steps_per_unit);

// Central-difference slope of the period map at h_center with the pinned
// offset 1e-6 * max(1, |h_center|).
double estimate_lambda(const SmoothingSpec& spec, double h_center, int steps_per_unit);

struct FixedPointSearch {
  double h;
  double residual;   // |period_map(h) - h| at the returned point
  int iterations;    // period-map evaluations spent
};

// Steffensen-accelerated fixed-point search started from h_start, run past
// 1e-10 down to the floating-point floor; falls back to secant steps if the
// accelerated iteration stops improving. NoConvergence carries a short trace.
FixedPointSearch find_fixed_point_numeric(const SmoothingSpec& spec, int steps_per_unit,
                                          double h_start);

}  // namespace relaydde
