#include "relaydde/smoothing.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace relaydde {

double quintic_odd_step(double v) { return v * (15.0 + v * v * (-10.0 + 3.0 * v * v)) / 8.0; }
double quintic_odd_step_d1(double v) {
  double w = 1.0 - v * v;
  return 15.0 * w * w / 8.0;
}
double quintic_odd_step_d2(double v) { return -7.5 * v * (1.0 - v * v); }

double bump_sextic(double v) {
  double w = 1.0 - v * v;
  return w * w * w;
}
double bump_sextic_d1(double v) {
  double w = 1.0 - v * v;
  return -6.0 * v * w * w;
}
double bump_sextic_d2(double v) {
  double w = 1.0 - v * v;
  return w * (30.0 * v * v - 6.0);
}

double smoothstep01(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smoothstep01_d1(double t) {
  double w = 1.0 - t;
  return 30.0 * t * t * w * w;
}
double smoothstep01_d2(double t) { return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t); }

namespace {

// 32-point Gauss-Legendre rule on [-1, 1], nodes by Newton on P_32.
struct GaussRule {
  std::array<double, 32> x;
  std::array<double, 32> w;
};

const GaussRule& gauss32() {
  static const GaussRule rule = [] {
    GaussRule r{};
    const int n = 32;
    for (int i = 0; i < n / 2; ++i) {
      double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int iter = 0; iter < 64; ++iter) {
        double p1 = 1.0, p2 = 0.0;
        for (int k = 0; k < n; ++k) {
          double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * k + 1.0) * z * p2 - k * p3) / (k + 1.0);
        }
        pp = n * (z * p1 - p2) / (z * z - 1.0);
        double dz = p1 / pp;
        z -= dz;
        if (std::abs(dz) < 1e-15 && iter > 2) break;
      }
      r.x[i] = -z;
      r.x[n - 1 - i] = z;
      r.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
      r.w[n - 1 - i] = r.w[i];
    }
    return r;
  }();
  return rule;
}

double integrate_gauss32(const std::function<double(double)>& f, double a, double b) {
  const GaussRule& r = gauss32();
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < 32; ++i) acc += r.w[i] * f(mid + half * r.x[i]);
  return acc * half;
}

double simpson_value(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                            double fa, double fm, double fb, double whole, double tol,
                            int depth) {
  double m = 0.5 * (a + b);
  double flm = f(0.5 * (a + m)), frm = f(0.5 * (m + b));
  double left = simpson_value(fa, flm, fm, a, m);
  double right = simpson_value(fm, frm, fb, m, b);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = simpson_value(fa, fm, fb, a, b);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 56);
}

void require_band_inside(double alpha, double delta) {
  if (!(delta > 0.0)) throw OutOfRange("delta must be positive");
  if (!(delta < std::abs(alpha))) {
    std::ostringstream msg;
    msg << "delta " << delta << " reaches the forcing level |alpha| = " << std::abs(alpha);
    throw DeltaTooLarge(msg.str());
  }
}

double eval_row(const std::vector<double>& row, double v) {
  double acc = 0.0;
  for (size_t k = row.size(); k-- > 0;) acc = acc * v + row[k];
  return acc;
}

constexpr double kMixingBound = 0.31254688;  // largest bump amplitude keeping |f~| <= 1
constexpr int kBoundsGrid = 10000;

}  // namespace

double j_functional(double alpha, double delta, double mu, const PiecewisePoly& g) {
  require_band_inside(alpha, delta);
  const double ratio = delta / alpha;  // |ratio| < 1
  if (std::abs(ratio) <= 0.5) {
    // 1/(alpha-u)^2 = (1/alpha^2) sum (n+1) (u/alpha)^n; with u = delta v the
    // n-th term needs the v-moments of each row over its half interval.
    double acc = 0.0;
    bool prev_tiny = false;
    for (int n = 0; n <= 400; ++n) {
      double moment = 0.0;
      for (size_t k = 0; k < g.neg.size(); ++k) {
        int p = n + static_cast<int>(k);
        moment += g.neg[k] * ((p % 2 == 0 ? 1.0 : -1.0) / (p + 1.0));
      }
      for (size_t k = 0; k < g.pos.size(); ++k) {
        int p = n + static_cast<int>(k);
        moment += g.pos[k] / (p + 1.0);
      }
      double term = (n + 1.0) * std::pow(ratio, n) * moment;
      acc += term;
      // Parity can zero out alternate terms, so stop on two tiny terms in a row.
      bool tiny = std::abs(term) < 1e-22 * std::abs(acc);
      if (n > 6 && tiny && prev_tiny) break;
      prev_tiny = tiny;
    }
    return (alpha - delta) / mu * (delta / (alpha * alpha)) * acc;
  }
  // Near-critical band: integrate each half directly.
  auto half = [&](const std::vector<double>& row, double lo, double hi) {
    auto f = [&](double u) {
      double d = alpha - u;
      return eval_row(row, u / delta) / (d * d);
    };
    double scale = std::max({std::abs(f(lo)), std::abs(f(hi)), std::abs(f(0.5 * (lo + hi)))});
    return adaptive_simpson(f, lo, hi, 1e-15 * scale * (hi - lo) + 1e-300);
  };
  double integral = half(g.neg, -delta, 0.0) + half(g.pos, 0.0, delta);
  return (alpha - delta) / mu * integral;
}

double j_functional(double alpha, double delta, double mu,
                    const std::function<double(double)>& g) {
  require_band_inside(alpha, delta);
  auto weighted = [&](double u) {
    double d = alpha - u;
    return g(u) / (d * d);
  };
  auto half = [&](double lo, double hi) {
    double scale = std::max({std::abs(weighted(lo)), std::abs(weighted(hi)),
                             std::abs(weighted(0.5 * (lo + hi))), 1e-300});
    return adaptive_simpson(weighted, lo, hi, 1e-15 * scale * (hi - lo) + 1e-300);
  };
  return (alpha - delta) / mu * (half(-delta, 0.0) + half(0.0, delta));
}

double j_functional_relay(double alpha, double delta, double mu) {
  require_band_inside(alpha, delta);
  return -2.0 * delta * delta / (mu * alpha * (alpha + delta));
}

double j_functional_const(double alpha, double delta, double mu, double c) {
  require_band_inside(alpha, delta);
  return 2.0 * c * delta / (mu * (alpha + delta));
}

ThetaPair theta_offsets(double alpha, double delta, double mu) {
  require_band_inside(alpha, delta);
  return {-std::log1p(-delta / alpha) / mu, -std::log1p(delta / alpha) / mu};
}

double SmoothFeedback::operator()(double u) const {
  if (u >= delta) return -1.0;
  if (u <= -delta) return 1.0;
  double v = u / delta;
  return -quintic_odd_step(v) + mixing * bump_sextic(v);
}

double SmoothFeedback::derivative(double u) const {
  if (std::abs(u) >= delta) return 0.0;
  double v = u / delta;
  return (-quintic_odd_step_d1(v) + mixing * bump_sextic_d1(v)) / delta;
}

double SmoothFeedback::second_derivative(double u) const {
  if (std::abs(u) >= delta) return 0.0;
  double v = u / delta;
  return (-quintic_odd_step_d2(v) + mixing * bump_sextic_d2(v)) / (delta * delta);
}

PiecewisePoly SmoothFeedback::band_poly() const {
  // -S(v) + c (1 - v^2)^3 as one monomial row, identical on both halves.
  std::vector<double> row = {mixing,          -15.0 / 8.0, -3.0 * mixing, 10.0 / 8.0,
                             3.0 * mixing, -3.0 / 8.0,  -mixing};
  return {row, row};
}

double solve_feedback_mixing(double alpha, double delta, double mu) {
  require_band_inside(alpha, delta);
  const double target = j_functional_relay(alpha, delta, mu);
  auto residual = [&](double c) {
    return j_functional(alpha, delta, mu, SmoothFeedback{delta, c}.band_poly()) - target;
  };
  double lo = -kMixingBound, hi = kMixingBound;
  double flo = residual(lo), fhi = residual(hi);
  if ((flo > 0.0) == (fhi > 0.0))
    throw NoConvergence("feedback mixing: no sign change on the admissible bracket");
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    double fmid = residual(mid);
    if (fmid == 0.0) return mid;
    if ((fmid > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  double c = 0.5 * (lo + hi);
  if (std::abs(residual(c)) > 1e-12)
    throw NoConvergence("feedback mixing: residual above 1e-12 after bisection");
  return c;
}

SmoothFeedback build_f_tilde(const Params& params, double delta) {
  if (!(delta > 0.0)) throw OutOfRange("delta must be positive");
  if (!(delta < (params.a1 / params.mu) * (1.0 - 1e-6)))
    throw DeltaTooLarge("delta must stay below a1/mu");
  double c = solve_feedback_mixing(-params.a1 / params.mu, delta, params.mu);
  return {delta, c};
}

double TransitionWindow::value(double tau) const {
  if (tau <= 0.0) return v_start;
  if (tau >= 1.0) return v_end;
  double base = v_end;
  if (tau < sharpness)
    base += (v_start - v_end) * (1.0 - smoothstep01(tau / sharpness));
  double correction = 0.0;
  if (tau >= sharpness) {
    double w = 2.0 * (tau - sharpness) / (1.0 - sharpness) - 1.0;
    correction = mixing * bump_sextic(w);
  }
  return base + correction;
}

double TransitionWindow::derivative(double tau) const {
  if (tau <= 0.0 || tau >= 1.0) return 0.0;
  if (tau < sharpness)
    return -(v_start - v_end) * smoothstep01_d1(tau / sharpness) / sharpness;
  double w = 2.0 * (tau - sharpness) / (1.0 - sharpness) - 1.0;
  return mixing * bump_sextic_d1(w) * 2.0 / (1.0 - sharpness);
}

namespace {

TransitionWindow solve_window(double start, double v_start, double v_end, double rho,
                              double mu, double bound_hi) {
  auto weight = [&](double tau) { return std::exp(-mu * rho * (1.0 - tau)); };
  for (double s = 0.25; s >= 1.0 / 1024.0 - 1e-15; s *= 0.5) {
    double base_part = integrate_gauss32(
        [&](double tau) { return (1.0 - smoothstep01(tau / s)) * weight(tau); }, 0.0, s);
    base_part *= (v_start - v_end);
    double bump_part = integrate_gauss32(
        [&](double tau) {
          return bump_sextic(2.0 * (tau - s) / (1.0 - s) - 1.0) * weight(tau);
        },
        s, 1.0);
    TransitionWindow win{start, v_start, v_end, rho, s, -base_part / bump_part};

    // The zero-mean condition, recomputed through value() as a wiring check.
    double resid = integrate_gauss32(
                       [&](double tau) { return (win.value(tau) - v_end) * weight(tau); },
                       0.0, s) +
                   integrate_gauss32(
                       [&](double tau) { return (win.value(tau) - v_end) * weight(tau); },
                       s, 1.0);
    if (std::abs(resid) > 1e-12 * std::max(1.0, std::abs(v_start - v_end)))
      throw NoConvergence("transition window: zero-mean residual above 1e-12");

    bool inside = true;
    for (int i = 0; i <= kBoundsGrid && inside; ++i) {
      double v = win.value(static_cast<double>(i) / kBoundsGrid);
      inside = v > 0.0 && v <= bound_hi;
    }
    if (inside) return win;
  }
  throw NoAdmissibleMixing("transition window: no sharpness in the menu keeps the coefficient in range");
}

}  // namespace

SmoothCoefficient build_a_tilde(const Params& params, double rho) {
  if (!(rho > 0.0)) throw OutOfRange("rho must be positive");
  if (!(rho <= params.p1 && rho <= params.p2))
    throw WindowTooWide("rho exceeds a coefficient piece");
  SmoothCoefficient out{params, rho, params.a1 == params.a2, {}, {}};
  if (out.trivial) return out;
  const double hi = 2.0 * std::max(params.a1, params.a2);
  out.w1 = solve_window(0.0, params.a2, params.a1, rho, params.mu, hi);
  out.w2 = solve_window(params.p1, params.a1, params.a2, rho, params.mu, hi);
  return out;
}

double SmoothCoefficient::operator()(double t) const {
  if (trivial) return params.a1;
  double r = fold_time(t, params.period());
  if (r < rho) return w1.value(r / rho);
  if (r >= params.p1 && r < params.p1 + rho) return w2.value((r - params.p1) / rho);
  return coefficient_at(params, r);
}

double SmoothCoefficient::derivative(double t) const {
  if (trivial) return 0.0;
  double r = fold_time(t, params.period());
  if (r < rho) return w1.derivative(r / rho) / rho;
  if (r >= params.p1 && r < params.p1 + rho) return w2.derivative((r - params.p1) / rho) / rho;
  return 0.0;
}

double r_delta(const Params& params, double delta) {
  SmoothFeedback f = build_f_tilde(params, delta);
  PiecewisePoly diff = f.band_poly();  // f~ - f: add back sign(u)
  diff.neg[0] -= 1.0;
  diff.pos[0] += 1.0;
  return params.a2 * j_functional(params.a1 / params.mu, delta, params.mu, diff);
}

double eta_slope(const Params& params, double delta) {
  return params.mu * std::exp(params.mu * (1.0 - params.period())) *
         (2.0 * std::exp(params.mu) - 1.0) / (params.a1 - params.mu * delta);
}

double eta_intercept(const Params& params, double delta) {
  return params.a1 * std::exp(params.mu * (1.0 - params.period())) *
         (2.0 * std::exp(params.mu) - 1.0) / (params.a1 - params.mu * delta);
}

double eta(const Params& params, double delta, double h) {
  return eta_intercept(params, delta) + eta_slope(params, delta) * h;
}

AffineMap f_tilde_map_predict(const Params& params, double delta) {
  AffineMap base = single_coefficients(params);
  double r = r_delta(params, delta);
  return {base.slope + eta_slope(params, delta) * r,
          base.intercept + eta_intercept(params, delta) * r, AffineMap::Kind::SingleF};
}

double predicted_fixed_point(const Params& params, double delta) {
  AffineMap map = f_tilde_map_predict(params, delta);
  if (!(std::abs(map.slope) < 1.0))
    throw HypothesisFailed({"|m~| < 1"}, "predicted smoothed slope leaves the contraction range");
  return map.intercept / (1.0 - map.slope);
}

namespace {

// The three admissibility clauses; empty result means delta passes.
std::string first_failed_clause(const Params& params, double h_star, double delta) {
  const double level = params.a1 / params.mu;
  if (!(delta < level * (1.0 - 1e-6))) return "delta < (a1/mu)(1 - 1e-6)";
  if (!(delta < 0.5 * h_star)) return "delta < h*/2";
  ThetaPair th = theta_offsets(-level, delta, params.mu);
  double band_cost = delta + 2.0 * params.a1 * (th.minus - th.plus);
  double x1 = std::abs((params.a1 / params.mu) * std::expm1(-params.mu));
  if (!(band_cost < x1)) return "delta + 2 a1 (theta- - theta+) < |x1|";
  return {};
}

}  // namespace

double max_admissible_delta(const Params& params) {
  FixedPointResult fp = fixed_point_single(params);
  auto ok = [&](double d) { return first_failed_clause(params, fp.h_star, d).empty(); };
  double hi = std::min((params.a1 / params.mu) * (1.0 - 1e-6), 0.5 * fp.h_star);
  if (ok(hi)) return hi;
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

SmoothingSpec build_smoothing_spec(const Params& params, double delta, double rho) {
  FixedPointResult fp = fixed_point_single(params);
  if (!(delta > 0.0)) throw OutOfRange("delta must be positive");
  if (std::string clause = first_failed_clause(params, fp.h_star, delta); !clause.empty())
    throw DeltaTooLarge("delta violates: " + clause);

  SingleTransit tr = single_transit(params, fp.h_star);
  double rho_cap = 0.9 * std::min(tr.t1, tr.t2 + 1.0 - params.p1);
  if (!(rho > 0.0)) throw OutOfRange("rho must be positive");
  if (!(rho <= rho_cap)) {
    std::ostringstream msg;
    msg << "rho " << rho << " exceeds 0.9 min(t1, t2 + 1 - p1) = " << rho_cap;
    throw WindowTooWide(msg.str());
  }

  SmoothingSpec spec{params,
                     delta,
                     rho,
                     fp.h_star,
                     build_f_tilde(params, delta),
                     build_a_tilde(params, rho),
                     r_delta(params, delta),
                     theta_offsets(-params.a1 / params.mu, delta, params.mu),
                     theta_offsets(params.a1 / params.mu, delta, params.mu)};
  return spec;
}

std::vector<std::pair<double, double>> exceptional_intervals(const SmoothingSpec& spec) {
  SingleTransit tr = single_transit(spec.params, spec.h_star);
  return {{0.0, spec.rho},
          {tr.t1 + 1.0 + spec.first.plus, tr.t1 + 1.0 + spec.first.minus},
          {spec.params.p1, spec.params.p1 + spec.rho},
          {tr.t2 + 1.0 + spec.second.minus, tr.t2 + 1.0 + spec.second.plus}};
}

}  // namespace relaydde
