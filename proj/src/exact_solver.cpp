#include "relaydde/exact_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "relaydde/return_maps.hpp"

namespace relaydde {

namespace {

constexpr double kMergeWindow = 1e-13;
constexpr long kEventBudget = 1'000'000;

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace

const char* event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::ZeroCrossing: return "ZeroCrossing";
    case EventKind::CoefficientSwitch: return "CoefficientSwitch";
    case EventKind::DelayedSignSwitch: return "DelayedSignSwitch";
  }
  return "?";
}

double ExpSegment::eval(double mu, double t) const {
  return alpha + beta * std::exp(-mu * (t - t_start));
}

double Trajectory::eval(double t) const {
  if (t < 0.0 || t > horizon || segments.empty())
    throw OutOfRange("eval at t outside [0, horizon]");
  // Last segment with t_start <= t; ownership [t_start, t_end), last closed.
  auto it = std::upper_bound(segments.begin(), segments.end(), t,
                             [](double v, const ExpSegment& s) { return v < s.t_start; });
  size_t idx = static_cast<size_t>(it - segments.begin());
  idx = idx == 0 ? 0 : idx - 1;
  return segments[idx].eval(params.mu, t);
}

double Trajectory::max_join_mismatch() const {
  double worst = 0.0;
  for (size_t i = 0; i + 1 < segments.size(); ++i) {
    double left = segments[i].eval(params.mu, segments[i].t_end);
    double right = segments[i + 1].eval(params.mu, segments[i + 1].t_start);
    worst = std::max(worst, std::abs(left - right));
  }
  return worst;
}

Trajectory solve_exact(const Params& params, double h, double t_end) {
  if (!(t_end > 0.0)) throw OutOfRange("t_end must be positive");
  const double mu = params.mu;
  const double T = params.period();

  Trajectory traj;
  traj.params = params;
  traj.initial_value = h;
  traj.horizon = t_end;

  // Machine state: time, value, sign of x on the current piece, the active
  // coefficient, the delayed feedback sign, and the queue of future delayed
  // sign switches (each zero crossing schedules one at zero time + 1).
  double t0 = 0.0;
  double x0 = h;
  int cur_sign = sign_of(h);
  int delayed_sign = sign_of(h);
  bool on_first_piece = true;  // coefficient piece toggles a1 <-> a2
  long switch_count = 0;       // coefficient switches consumed so far
  std::deque<double> pending_delay;

  if (cur_sign == 0) throw DegenerateSegment("x(0) = 0 with zero history: solution identically zero");

  auto next_coeff_switch = [&]() {
    // Switch instants alternate p1, T, T+p1, 2T, ... ; counting them keeps
    // the ladder exact instead of folding t with fmod.
    long k = switch_count / 2;
    return (switch_count % 2 == 0) ? k * T + params.p1 : (k + 1) * T;
  };

  long events_done = 0;
  while (t0 < t_end) {
    const double a = on_first_piece ? params.a1 : params.a2;
    const double forcing = a * static_cast<double>(-delayed_sign);
    const double alpha = forcing / mu;
    const double beta = x0 - alpha;
    if (alpha == 0.0 && beta == 0.0)
      throw DegenerateSegment("forcing and state both vanished");

    double t_zero = std::numeric_limits<double>::infinity();
    if (x0 != 0.0 && alpha != 0.0 && sign_of(x0) != sign_of(alpha))
      t_zero = t0 + std::log1p(-x0 / alpha) / mu;
    const double t_coeff = next_coeff_switch();
    const double t_delay = pending_delay.empty()
                               ? std::numeric_limits<double>::infinity()
                               : pending_delay.front();

    const double boundary = std::min({t_zero, t_coeff, t_delay});
    if (boundary >= t_end) {
      traj.segments.push_back({t0, t_end, alpha, beta});
      break;
    }

    if (boundary > t0) traj.segments.push_back({t0, boundary, alpha, beta});

    const bool fire_zero = t_zero <= boundary + kMergeWindow;
    const bool fire_coeff = t_coeff <= boundary + kMergeWindow;
    const bool fire_delay = t_delay <= boundary + kMergeWindow;
    const bool merged = (fire_zero + fire_coeff + fire_delay) > 1;

    double x_at_boundary = fire_zero ? 0.0 : alpha + beta * std::exp(-mu * (boundary - t0));

    if (fire_coeff) {
      traj.events.push_back({t_coeff, EventKind::CoefficientSwitch, merged});
      on_first_piece = !on_first_piece;
      ++switch_count;
    }
    if (fire_delay) {
      traj.events.push_back({t_delay, EventKind::DelayedSignSwitch, merged});
      delayed_sign = -delayed_sign;
      pending_delay.pop_front();
    }
    if (fire_zero) {
      traj.events.push_back({t_zero, EventKind::ZeroCrossing, merged});
      // The sign x takes after touching zero follows the forcing in effect
      // after any simultaneous switches. Only a genuine sign change moves the
      // delayed feedback one unit later; a graze (forcing pushed back toward
      // the old sign by a merged switch) does not.
      const double a_after = on_first_piece ? params.a1 : params.a2;
      const double alpha_after = a_after * static_cast<double>(-delayed_sign) / mu;
      int new_sign = sign_of(alpha_after);
      if (new_sign == -cur_sign) pending_delay.push_back(t_zero + 1.0);
      cur_sign = new_sign;
    } else if (x_at_boundary != 0.0) {
      cur_sign = sign_of(x_at_boundary);
    }

    t0 = boundary;
    x0 = x_at_boundary;

    events_done += fire_zero + fire_coeff + fire_delay;
    if (events_done > kEventBudget)
      throw Error("event budget exceeded: more than 1e6 events before t_end");
  }

  // Merged events can be logged a hair out of order; keep the log sorted.
  std::stable_sort(traj.events.begin(), traj.events.end(),
                   [](const Event& a, const Event& b) { return a.time < b.time; });
  return traj;
}

std::vector<double> period_iterate(const Params& params, double h, int n) {
  if (n < 0) throw OutOfRange("iterate count must be >= 0");
  const double T = params.period();
  std::vector<double> out;
  out.reserve(static_cast<size_t>(n));
  double cur = h;
  for (int i = 0; i < n; ++i) {
    ShapeReport shape = shape_conditions_single(params, cur);
    if (!shape.satisfied) {
      std::ostringstream msg;
      msg << "single-period shape conditions violated at iterate " << i << " (h = " << cur << ")";
      throw ShapeViolated(i, msg.str());
    }
    Trajectory traj = solve_exact(params, cur, T);
    cur = traj.eval(T);
    out.push_back(cur);
  }
  return out;
}

}  // namespace relaydde
