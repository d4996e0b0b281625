#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "relaydde/params.hpp"
#include "relaydde/return_maps.hpp"

namespace relaydde {

// Odd quintic step: S(-1) = -1, S(1) = 1, S' = S'' = 0 at both ends.
double quintic_odd_step(double v);
double quintic_odd_step_d1(double v);
double quintic_odd_step_d2(double v);

// Even sextic bump (1 - v^2)^3 on [-1, 1], zero with two derivatives at the ends.
double bump_sextic(double v);
double bump_sextic_d1(double v);
double bump_sextic_d2(double v);

// Monotone quintic 0 -> 1 on [0, 1] with flat C^2 ends.
double smoothstep01(double t);
double smoothstep01_d1(double t);
double smoothstep01_d2(double t);

// Polynomial in v = u/delta with separate coefficient rows left and right of
// zero; the representation the weighted integrals below consume.
struct PiecewisePoly {
  std::vector<double> neg;  // v in [-1, 0)
  std::vector<double> pos;  // v in (0, 1]
};

// The crossing-weighted integral ((alpha - delta)/mu) * int_{-delta}^{delta}
// g(u) / (alpha - u)^2 du. Requires delta < |alpha| (DeltaTooLarge).
double j_functional(double alpha, double delta, double mu, const PiecewisePoly& g);
double j_functional(double alpha, double delta, double mu,
                    const std::function<double(double)>& g);

// Closed forms used as anchors: g = -sign and g = const c.
double j_functional_relay(double alpha, double delta, double mu);
double j_functional_const(double alpha, double delta, double mu, double c);

// Time offsets, relative to a zero crossing of slope-limit alpha, at which
// the trajectory meets +delta (plus) and -delta (minus).
struct ThetaPair {
  double plus;
  double minus;
};

ThetaPair theta_offsets(double alpha, double delta, double mu);

// C^2 replacement for the relay: -S(u/delta) plus a mixing bump chosen so the
// first crossing's weighted integral is unchanged.
struct SmoothFeedback {
  double delta;
  double mixing;

  double operator()(double u) const;
  double derivative(double u) const;
  double second_derivative(double u) const;

  // f~ restricted to the band, as polynomial rows in v = u/delta.
  PiecewisePoly band_poly() const;
};

// Mixing amplitude solved by bisection so that
// J(alpha, f~_c) = J(alpha, -sign); residual below 1e-12.
double solve_feedback_mixing(double alpha, double delta, double mu);

SmoothFeedback build_f_tilde(const Params& params, double delta);

// One C^2 ramp of width rho: a fast base transition over [0, s*rho] plus a
// zero-mean-correction bump on the remainder, scaled time tau = (t-start)/rho.
struct TransitionWindow {
  double start;
  double v_start;
  double v_end;
  double rho;
  double sharpness;  // s, fraction of the window used by the base step
  double mixing;     // bump amplitude

  double value(double tau) const;
  double derivative(double tau) const;  // d/dtau
};

// T-periodic C^2 coefficient: equals the step coefficient outside the two
// transition windows [0, rho] and [p1, p1 + rho].
struct SmoothCoefficient {
  Params params;
  double rho;
  bool trivial;  // a1 == a2: identically a1, no windows
  TransitionWindow w1;  // a2 -> a1 across t = 0
  TransitionWindow w2;  // a1 -> a2 across t = p1
  double operator()(double t) const;
  double derivative(double t) const;
};

// Solves both window mixings; sharpness is halved from 1/4 down to 1/1024
// until the windowed coefficient stays inside (0, 2 max(a1, a2)] on a dense
// grid, else NoAdmissibleMixing. Throws WindowTooWide if the windows do not
// fit inside their coefficient pieces.
SmoothCoefficient build_a_tilde(const Params& params, double rho);

// The one-period defect of the smoothed second crossing, a2 * J(a1/mu, f~ - f).
double r_delta(const Params& params, double delta);

// Sensitivity of the return value at T to a defect injected at the second
// crossing; affine in h.
double eta(const Params& params, double delta, double h);
double eta_slope(const Params& params, double delta);
double eta_intercept(const Params& params, double delta);

// First-order prediction of the smoothed return map F~(h) = F(h) + eta * R.
AffineMap f_tilde_map_predict(const Params& params, double delta);

// Fixed point of the predicted map.
double predicted_fixed_point(const Params& params, double delta);

// Largest delta passing the admissibility clauses, found by bisection:
//   delta + 2 a1 (theta_minus - theta_plus) < |x1|,
//   delta < (a1/mu)(1 - 1e-6),
//   delta < h*/2.
double max_admissible_delta(const Params& params);

struct SmoothingSpec {
  Params params;
  double delta;
  double rho;
  double h_star;
  SmoothFeedback f_tilde;
  SmoothCoefficient a_tilde;
  double defect;     // r_delta at this delta
  ThetaPair first;   // band offsets at the falling crossing, alpha = -a1/mu
  ThetaPair second;  // band offsets at the rising crossing, alpha = +a1/mu
};

// Validates delta and rho against the single-period orbit, then assembles
// the smoothed feedback and coefficient. Throws DeltaTooLarge, WindowTooWide,
// or whatever fixed_point_single raises.
SmoothingSpec build_smoothing_spec(const Params& params, double delta, double rho);

// Intervals of one period where the smoothed and relay solutions are allowed
// to differ at leading order: the two delayed crossing bands and the two
// coefficient windows.
std::vector<std::pair<double, double>> exceptional_intervals(const SmoothingSpec& spec);

}  // namespace relaydde
