#include "relaydde/dde_integrator.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace relaydde {

namespace {

// Cubic Hermite at the midpoint of one step: the only off-node delayed
// lookup the RK4 stages need.
double hermite_mid(double x0, double d0, double x1, double d1, double dt) {
  return 0.5 * (x0 + x1) + 0.125 * dt * (d0 - d1);
}

bool near_integer(double v) {
  return std::abs(v - std::round(v)) <= 1e-9 * std::max(1.0, std::abs(v));
}

}  // namespace

double SampledTrajectory::eval(double t) const {
  if (t <= 0.0) {
    if (t < -1.0 - 1e-12) throw OutOfRange("eval before the history interval");
    return history_value;
  }
  if (t > horizon + 1e-9 * std::max(1.0, horizon))
    throw OutOfRange("eval beyond the integrated horizon");
  double pos = t / step;
  size_t last = values.size() - 1;
  size_t k = static_cast<size_t>(pos);
  if (k >= last) k = last - 1;
  double s = pos - static_cast<double>(k);
  if (s > 1.0) s = 1.0;
  double omS = 1.0 - s;
  double h00 = (1.0 + 2.0 * s) * omS * omS;
  double h10 = s * omS * omS;
  double h01 = s * s * (3.0 - 2.0 * s);
  double h11 = s * s * (s - 1.0);
  return h00 * values[k] + h10 * step * derivatives[k] + h01 * values[k + 1] +
         h11 * step * derivatives[k + 1];
}

int align_steps(const SmoothingSpec& spec, int requested) {
  const Params& p = spec.params;
  for (int n = std::max(requested, 100); n <= 1'000'000; ++n) {
    double nd = n;
    bool ok = near_integer(nd * p.p1) && near_integer(nd * p.p2) && near_integer(nd * spec.rho);
    if (ok && !spec.a_tilde.trivial)
      ok = near_integer(nd * spec.rho * spec.a_tilde.w1.sharpness) &&
           near_integer(nd * spec.rho * spec.a_tilde.w2.sharpness);
    if (ok) return n;
  }
  throw GridMisaligned("no step count up to 1e6 lands on every breakpoint");
}

SampledTrajectory integrate_smoothed(const SmoothingSpec& spec, double h, double t_end,
                                     int steps_per_unit) {
  if (steps_per_unit < 100) throw OutOfRange("steps_per_unit must be at least 100");
  if (!(t_end > 0.0)) throw OutOfRange("t_end must be positive");
  const long n = steps_per_unit;
  const double step = 1.0 / static_cast<double>(n);
  const double m_real = t_end * static_cast<double>(n);
  if (!near_integer(m_real)) throw GridMisaligned("t_end is not a grid point");
  const long m = std::lround(m_real);

  const double mu = spec.params.mu;
  const SmoothFeedback& f = spec.f_tilde;
  const SmoothCoefficient& a = spec.a_tilde;

  SampledTrajectory traj;
  traj.step = step;
  traj.horizon = t_end;
  traj.history_value = h;
  traj.values.resize(static_cast<size_t>(m) + 1);
  traj.derivatives.resize(static_cast<size_t>(m) + 1);

  double x = h;
  double comp = 0.0;  // Kahan compensation for the node accumulation
  traj.values[0] = h;
  traj.derivatives[0] = -mu * h + a(0.0) * f(h);

  for (long i = 0; i < m; ++i) {
    const double t = static_cast<double>(i) * step;
    const long j = i - n;  // node index of t - 1

    double xd_half, xd_next;
    if (j + 1 <= 0) {
      xd_half = h;
      xd_next = h;
    } else {
      size_t sj = static_cast<size_t>(j);
      xd_half = hermite_mid(traj.values[sj], traj.derivatives[sj], traj.values[sj + 1],
                            traj.derivatives[sj + 1], step);
      xd_next = traj.values[sj + 1];
    }

    const double a_half = a(t + 0.5 * step);
    const double a_next = a(t + step);
    const double fd_half = f(xd_half);
    const double fd_next = f(xd_next);

    const double k1 = traj.derivatives[static_cast<size_t>(i)];
    const double k2 = -mu * (x + 0.5 * step * k1) + a_half * fd_half;
    const double k3 = -mu * (x + 0.5 * step * k2) + a_half * fd_half;
    const double k4 = -mu * (x + step * k3) + a_next * fd_next;

    const double incr = step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double y = incr - comp;
    const double xn = x + y;
    comp = (xn - x) - y;
    x = xn;
    if (!std::isfinite(x)) {
      std::ostringstream msg;
      msg << "state became non-finite at t = " << t + step;
      throw NonFiniteState(msg.str());
    }
    traj.values[static_cast<size_t>(i) + 1] = x;
    traj.derivatives[static_cast<size_t>(i) + 1] = -mu * x + a_next * fd_next;
  }
  return traj;
}

double period_map(const SmoothingSpec& spec, double h, int steps_per_unit) {
  SampledTrajectory traj = integrate_smoothed(spec, h, spec.params.period(), steps_per_unit);
  return traj.values.back();
}

double estimate_lambda(const SmoothingSpec& spec, double h_center, int steps_per_unit) {
  const double eps = 1e-6 * std::max(1.0, std::abs(h_center));
  return (period_map(spec, h_center + eps, steps_per_unit) -
          period_map(spec, h_center - eps, steps_per_unit)) /
         (2.0 * eps);
}

FixedPointSearch find_fixed_point_numeric(const SmoothingSpec& spec, int steps_per_unit,
                                          double h_start) {
  auto G = [&](double h) { return period_map(spec, h, steps_per_unit); };
  auto tol_at = [](double h) {
    return std::max(1e-14, 8.0 * std::numeric_limits<double>::epsilon() *
                               std::max(1.0, std::abs(h)));
  };

  double h = h_start;
  double best_h = h_start;
  double best_res = std::numeric_limits<double>::infinity();
  int evals = 0;
  int stall = 0;
  std::ostringstream trace;

  auto note = [&](double at, double res) {
    if (res < best_res) {
      best_res = res;
      best_h = at;
      stall = 0;
    } else {
      ++stall;
    }
  };

  // Steffensen rounds; the map is near-affine, so a round usually lands at
  // the floating-point floor immediately.
  for (int round = 0; round < 40 && evals < 180; ++round) {
    double g1 = G(h);
    ++evals;
    double r1 = g1 - h;
    note(h, std::abs(r1));
    trace << " [" << round << "] h=" << h << " resid=" << r1;
    if (std::abs(r1) <= tol_at(h)) return {h, std::abs(r1), evals};
    if (stall >= 3) break;

    double g2 = G(g1);
    ++evals;
    double r2 = g2 - g1;
    note(g1, std::abs(r2));
    if (std::abs(r2) <= tol_at(g1)) return {g1, std::abs(r2), evals};

    double denom = r2 - r1;
    double next = denom != 0.0 ? h - r1 * r1 / denom : g2;
    if (!std::isfinite(next)) break;
    h = next;
  }

  if (best_res <= 1e-12 * std::max(1.0, std::abs(best_h)))
    return {best_h, best_res, evals};

  // Secant fallback on G(h) - h from the two most recent distinct points.
  double ha = best_h;
  double fa = G(ha) - ha;
  ++evals;
  double hb = ha + std::max(1e-7, 16.0 * std::abs(fa));
  double fb = G(hb) - hb;
  ++evals;
  for (int it = 0; it < 60 && evals < 198; ++it) {
    if (fb == fa) break;
    double next = hb - fb * (hb - ha) / (fb - fa);
    if (!std::isfinite(next)) break;
    ha = hb;
    fa = fb;
    hb = next;
    fb = G(hb) - hb;
    ++evals;
    note(hb, std::abs(fb));
    trace << " [s" << it << "] h=" << hb << " resid=" << fb;
    if (std::abs(fb) <= tol_at(hb)) return {hb, std::abs(fb), evals};
    if (stall >= 4) break;
  }

  if (best_res <= 1e-10 * std::max(1.0, std::abs(best_h)))
    return {best_h, best_res, evals};
  throw NoConvergence("fixed point iteration stalled; trace:" + trace.str());
}

}  // namespace relaydde
