#include "relaydde/return_maps.hpp"

#include <cmath>
#include <sstream>

namespace relaydde {

namespace {

ConditionRecord strict_less(std::string name, double left, double right) {
  return {std::move(name), left, right, left < right};
}

bool all_hold(const std::vector<ConditionRecord>& records) {
  for (const auto& r : records)
    if (!r.holds) return false;
  return true;
}

std::string describe_failures(const ShapeReport& report) {
  std::ostringstream msg;
  msg << "shape conditions failed:";
  for (const auto& r : report.details)
    if (!r.holds) msg << " [" << r.name << ": " << r.left << " !< " << r.right << "]";
  return msg.str();
}

}  // namespace

AffineMap single_coefficients(const Params& p) {
  const double E = std::exp(-p.mu);
  const double tail = std::exp(-p.mu * (p.period() - 2.0));
  const double m = (2.0 * p.a2 / p.a1 - E) * (2.0 - E) * tail;
  const double b = (2.0 * p.a2 - p.a1 * E) / p.mu * (2.0 - E) * tail +
                   (p.a1 - p.a2) / p.mu * std::exp(-p.mu * p.p2) - p.a2 / p.mu;
  return {m, b, AffineMap::Kind::SingleF};
}

AffineMap double_coefficients(const Params& p) {
  const double k = (1.0 - 2.0 * (p.a2 / p.a1) * std::exp(p.mu)) * std::exp(-p.mu * p.period());
  const double d = (p.a2 - p.a1) / p.mu * std::exp(-p.mu * p.p2) +
                   p.a1 / p.mu * std::exp(-p.mu * p.period()) +
                   p.a2 / p.mu * (1.0 - 2.0 * std::exp(-p.mu * (p.period() - 1.0)));
  return {k, d, AffineMap::Kind::DoublePhi1};
}

SingleTransit single_transit(const Params& p, double h) {
  const double mu = p.mu;
  SingleTransit tr;
  tr.t1 = std::log1p(h * mu / p.a1) / mu;
  // x1 = -(a1/mu)(1 - e^{-mu}) written through expm1 to keep small-mu accuracy.
  tr.x1 = (p.a1 / mu) * std::expm1(-mu);
  tr.t2 = tr.t1 + 1.0 + std::log1p(-mu * tr.x1 / p.a1) / mu;
  tr.x2 = p.a1 / mu + (tr.x1 - p.a1 / mu) * std::exp(-mu * (p.p1 - tr.t1 - 1.0));
  tr.x3 = p.a2 / mu + (tr.x2 - p.a2 / mu) * std::exp(-mu * (tr.t2 + 1.0 - p.p1));
  tr.x4 = -p.a2 / mu + (tr.x3 + p.a2 / mu) * std::exp(-mu * (p.period() - tr.t2 - 1.0));
  return tr;
}

DoubleTransit double_transit(const Params& p, double h) {
  const double mu = p.mu;
  DoubleTransit tr;
  tr.t1 = std::log1p(h * mu / p.a1) / mu;
  tr.x1 = -p.a1 / mu + (h + p.a1 / mu) * std::exp(-mu * p.p1);
  tr.x2 = -p.a2 / mu + (tr.x1 + p.a2 / mu) * std::exp(-mu * (tr.t1 + 1.0 - p.p1));
  tr.x3 = p.a2 / mu + (tr.x2 - p.a2 / mu) * std::exp(-mu * (p.period() - tr.t1 - 1.0));
  return tr;
}

double phi2(const Params& p, double h) {
  const AffineMap map = double_coefficients(p);
  return -(map.slope * (-h) + map.intercept);
}

double composite_double(const Params& p, double h) {
  const AffineMap map = double_coefficients(p);
  const double k = map.slope;
  const double d = map.intercept;
  return k * k * h + k * d - d;
}

ShapeReport shape_conditions_single(const Params& p, double h) {
  const SingleTransit tr = single_transit(p, h);
  ShapeReport report;
  report.kind = ShapeReport::Kind::SinglePeriod;
  report.details = {
      strict_less("0 < t1", 0.0, tr.t1),
      strict_less("t1 + 1 < t2", tr.t1 + 1.0, tr.t2),
      strict_less("t2 < p1", tr.t2, p.p1),
      strict_less("p1 - t2 < 1", p.p1 - tr.t2, 1.0),
      strict_less("0 < x4", 0.0, tr.x4),
      strict_less("t2 + 1 < T", tr.t2 + 1.0, p.period()),
  };
  report.satisfied = all_hold(report.details);
  return report;
}

ShapeReport shape_conditions_double(const Params& p, double h) {
  const DoubleTransit tr = double_transit(p, h);
  ShapeReport report;
  report.kind = ShapeReport::Kind::DoublePeriod;
  report.details = {
      strict_less("t1 < p1", tr.t1, p.p1),
      strict_less("p1 < t1 + 1", p.p1, tr.t1 + 1.0),
      strict_less("t1 + 1 < T", tr.t1 + 1.0, p.period()),
      strict_less("1 < T - p1", 1.0, p.period() - p.p1),
      strict_less("x2 < 0", tr.x2, 0.0),
      strict_less("x3 < 0", tr.x3, 0.0),
  };
  report.satisfied = all_hold(report.details);
  return report;
}

FixedPointResult fixed_point_single(const Params& p) {
  const AffineMap map = single_coefficients(p);
  std::vector<std::string> failed;
  if (!(std::abs(map.slope) < 1.0)) failed.push_back("|m| < 1");
  if (!(map.intercept > 0.0)) failed.push_back("b > 0");
  if (!failed.empty()) {
    std::ostringstream msg;
    msg << "single-period hypotheses failed:";
    for (const auto& f : failed) msg << " " << f;
    msg << " (m = " << map.slope << ", b = " << map.intercept << ")";
    throw HypothesisFailed(std::move(failed), msg.str());
  }
  const double h_star = map.intercept / (1.0 - map.slope);
  ShapeReport shape = shape_conditions_single(p, h_star);
  if (!shape.satisfied) throw ShapeFailed(shape, describe_failures(shape));
  return {h_star, map.slope, std::abs(map.slope) < 1.0, std::move(shape)};
}

FixedPointResult fixed_point_double(const Params& p) {
  const AffineMap map = double_coefficients(p);
  std::vector<std::string> failed;
  if (!(std::abs(map.slope) < 1.0)) failed.push_back("|k| < 1");
  if (!(map.intercept < 0.0)) failed.push_back("d < 0");
  if (!failed.empty()) {
    std::ostringstream msg;
    msg << "double-period hypotheses failed:";
    for (const auto& f : failed) msg << " " << f;
    msg << " (k = " << map.slope << ", d = " << map.intercept << ")";
    throw HypothesisFailed(std::move(failed), msg.str());
  }
  const double h_star = -map.intercept / (1.0 + map.slope);
  ShapeReport shape = shape_conditions_double(p, h_star);
  if (!shape.satisfied) throw ShapeFailed(shape, describe_failures(shape));
  const double k = map.slope;
  return {h_star, k * k, k * k < 1.0, std::move(shape)};
}

}  // namespace relaydde
