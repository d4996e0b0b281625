#pragma once

#include <string>
#include <vector>

#include "relaydde/params.hpp"

namespace relaydde {

// One-dimensional return map h -> slope*h + intercept.
struct AffineMap {
  enum class Kind { SingleF, DoublePhi1 };
  double slope;
  double intercept;
  Kind kind;

  double apply(double h) const { return slope * h + intercept; }
};

// Single-period transit: zeros t1, t2 and the values at t1+1, p1, t2+1, T.
struct SingleTransit {
  double t1;
  double t2;
  double x1;
  double x2;
  double x3;
  double x4;
};

// Double-period transit: zero t1 and the values at p1, t1+1, T.
struct DoubleTransit {
  double t1;
  double x1;
  double x2;
  double x3;
};

// One strict inequality, recorded numerically: holds == (left < right).
struct ConditionRecord {
  std::string name;
  double left;
  double right;
  bool holds;
};

struct ShapeReport {
  enum class Kind { SinglePeriod, DoublePeriod };
  Kind kind;
  bool satisfied;  // conjunction of all records
  std::vector<ConditionRecord> details;
};

class ShapeFailed : public Error {
public:
  ShapeReport report;
  ShapeFailed(ShapeReport r, const std::string& msg) : Error(msg), report(std::move(r)) {}
};

struct FixedPointResult {
  double h_star;
  double multiplier;  // m for the single map, k^2 for the double composite
  bool stable;        // |multiplier| < 1
  ShapeReport shape;
};

// Slope and intercept of x4 = F(h) = m h + b.
AffineMap single_coefficients(const Params& params);

// Slope and intercept of x3 = Phi1(h) = k h + d.
AffineMap double_coefficients(const Params& params);

SingleTransit single_transit(const Params& params, double h);
DoubleTransit double_transit(const Params& params, double h);

// Phi2(h) = -Phi1(-h) = k h - d, defined for h < 0.
double phi2(const Params& params, double h);

// (Phi2 o Phi1)(h) = k^2 h + k d - d.
double composite_double(const Params& params, double h);

// The inequalities under which the single-period transit construction is
// valid: 0 < t1, t1+1 < t2, t2 < p1, p1 - t2 < 1, x4 > 0, t2 + 1 < T.
ShapeReport shape_conditions_single(const Params& params, double h);

// Double-period counterpart: t1 < p1, p1 < t1+1, t1+1 < T, T - p1 > 1,
// x2 < 0, x3 < 0.
ShapeReport shape_conditions_double(const Params& params, double h);

// h* = b/(1-m) with multiplier m, gated on |m| < 1, b > 0 (HypothesisFailed)
// and on the shape report at h* (ShapeFailed).
FixedPointResult fixed_point_single(const Params& params);

// h* = -d/(1+k) with multiplier k^2, gated on |k| < 1, d < 0 and the shape
// report at h*.
FixedPointResult fixed_point_double(const Params& params);

}  // namespace relaydde
