#include <cmath>

#include "doctest.h"
#include "relaydde/return_maps.hpp"
#include "support/sampler.hpp"

using namespace relaydde;

namespace {

// Reference values computed independently at 50-digit precision.
const Params kP1{2.0, 0.1, 3.0, 1.0, 0.1};
const Params kP2{4.0, 2.0, 0.5, 1.0, 0.1};

constexpr double kP1Slope = -0.72165206678037185;
constexpr double kP1Intercept = 1.7588696070757950;
constexpr double kP1Fixed = 1.0216173412814024;
constexpr double kP2Slope = -0.090521448075656202;
constexpr double kP2Intercept = -1.7176062837454395;
constexpr double kP2Fixed = 1.8885616160064442;

bool close(double a, double b, double rel = 1e-14) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("single map coefficients match the reference point") {
  AffineMap map = single_coefficients(kP1);
  CHECK(close(map.slope, kP1Slope));
  CHECK(close(map.intercept, kP1Intercept));
  CHECK(map.kind == AffineMap::Kind::SingleF);
  CHECK(close(map.apply(1.0), 1.0372175402954231));
}

TEST_CASE("single transit values match the reference point") {
  SingleTransit tr = single_transit(kP1, 1.0);
  CHECK(close(tr.t1, 0.48790164169432003));
  CHECK(close(tr.t2, 2.3969299309581390));
  CHECK(close(tr.x1, -1.9032516392808085));
  CHECK(close(tr.x2, 1.1704910050408371));
  CHECK(close(tr.x3, 1.1638562543938936));
  CHECK(close(tr.x4, 1.0372175402954231));
}

TEST_CASE("single transit at the fixed point") {
  SingleTransit tr = single_transit(kP1, kP1Fixed);
  CHECK(close(tr.t1, 0.49819031907329347));
  CHECK(close(tr.t2, 2.4072186083371124));
  CHECK(close(tr.x2, 1.1511079611310624));
  CHECK(close(tr.x3, 1.1450781691704286));
  CHECK(close(tr.x4, kP1Fixed, 1e-13));
}

TEST_CASE("single fixed point is gated and stable at the reference point") {
  FixedPointResult fp = fixed_point_single(kP1);
  CHECK(close(fp.h_star, kP1Fixed));
  CHECK(close(fp.multiplier, kP1Slope));
  CHECK(fp.stable);
  CHECK(fp.shape.satisfied);
  REQUIRE(fp.shape.details.size() == 6);
  for (const auto& rec : fp.shape.details) CHECK(rec.holds);
  CHECK(fp.shape.details[0].name == "0 < t1");
  CHECK(fp.shape.details[5].name == "t2 + 1 < T");
}

TEST_CASE("double map coefficients match the reference point") {
  AffineMap map = double_coefficients(kP2);
  CHECK(close(map.slope, kP2Slope));
  CHECK(close(map.intercept, kP2Intercept));
  CHECK(close(-map.intercept / (1.0 + map.slope), kP2Fixed));
}

TEST_CASE("double transit values match the reference point") {
  DoubleTransit tr = double_transit(kP2, 1.5);
  CHECK(close(tr.t1, 0.36813973122716311));
  CHECK(close(tr.x1, -0.52397888322036862));
  CHECK(close(tr.x2, -2.1434560400211642));
  CHECK(close(tr.x3, -1.8533884558589238));
  CHECK(close(tr.x3, kP2Slope * 1.5 + kP2Intercept));
}

TEST_CASE("half-period maps compose antisymmetrically") {
  AffineMap map = double_coefficients(kP2);
  for (double h : {0.5, 1.0, 1.5, kP2Fixed, 3.0}) {
    double down = map.apply(h);
    REQUIRE(down < 0.0);
    CHECK(close(phi2(kP2, down), map.slope * down - map.intercept));
    CHECK(close(composite_double(kP2, h), phi2(kP2, map.apply(h))));
  }
  CHECK(close(composite_double(kP2, kP2Fixed), kP2Fixed));
  CHECK(close(map.apply(kP2Fixed), -kP2Fixed));
}

TEST_CASE("double fixed point at the reference point trips the half-period equality") {
  // T - p1 = 1 exactly here, so the strict inequality set is violated even
  // though the dynamics are fine; the gate must report that specific record.
  try {
    fixed_point_double(kP2);
    FAIL("expected ShapeFailed");
  } catch (const ShapeFailed& e) {
    CHECK_FALSE(e.report.satisfied);
    bool found = false;
    for (const auto& rec : e.report.details)
      if (rec.name == "1 < T - p1") {
        found = true;
        CHECK_FALSE(rec.holds);
        CHECK(rec.left == 1.0);
        CHECK(rec.right == 1.0);
      } else {
        CHECK(rec.holds);
      }
    CHECK(found);
  }
}

TEST_CASE("double fixed point succeeds once the second window exceeds the delay") {
  Params p{4.0, 2.0, 0.5, 1.3, 0.1};
  FixedPointResult fp = fixed_point_double(p);
  AffineMap map = double_coefficients(p);
  CHECK(close(fp.h_star, -map.intercept / (1.0 + map.slope)));
  CHECK(close(fp.multiplier, map.slope * map.slope));
  CHECK(fp.stable);
  CHECK(close(composite_double(p, fp.h_star), fp.h_star, 1e-13));
}

TEST_CASE("hypothesis gate lists the violated inequalities") {
  // a2 >> a1 pushes the single slope far above 1.
  Params steep{0.1, 5.0, 1.5, 1.0, 0.1};
  try {
    fixed_point_single(steep);
    FAIL("expected HypothesisFailed");
  } catch (const HypothesisFailed& e) {
    REQUIRE(e.failed.size() >= 1);
    CHECK(e.failed[0] == "|m| < 1");
  }

  // Large a2 and long period push d positive.
  Params positive_d{0.5, 5.0, 0.6, 9.0, 0.3};
  AffineMap map = double_coefficients(positive_d);
  REQUIRE(map.intercept > 0.0);
  try {
    fixed_point_double(positive_d);
    FAIL("expected HypothesisFailed");
  } catch (const HypothesisFailed& e) {
    bool has_d = false;
    for (const auto& f : e.failed) has_d = has_d || f == "d < 0";
    CHECK(has_d);
  }
}

TEST_CASE("sampled single transits agree with the affine map") {
  for (const auto& s : testsupport::sample_single(40, 20240612u)) {
    AffineMap map = single_coefficients(s.params);
    SingleTransit tr = single_transit(s.params, s.h);
    CHECK(close(tr.x4, map.apply(s.h), 1e-11));
    double h_star = map.intercept / (1.0 - map.slope);
    CHECK(close(single_transit(s.params, h_star).x4, h_star, 1e-11));
    // x1 depends only on a1 and mu.
    CHECK(close(tr.x1, (s.params.a1 / s.params.mu) * std::expm1(-s.params.mu)));
  }
}

TEST_CASE("sampled double transits agree with the affine map") {
  for (const auto& s : testsupport::sample_double(40, 20240613u)) {
    AffineMap map = double_coefficients(s.params);
    DoubleTransit tr = double_transit(s.params, s.h);
    CHECK(close(tr.x3, map.apply(s.h), 1e-11));
    double h_star = -map.intercept / (1.0 + map.slope);
    CHECK(close(map.apply(h_star), -h_star, 1e-11));
    CHECK(close(composite_double(s.params, h_star), h_star, 1e-11));
  }
}
