#pragma once

#include <vector>

#include "relaydde/params.hpp"

namespace relaydde {

enum class EventKind { ZeroCrossing, CoefficientSwitch, DelayedSignSwitch };

const char* event_kind_name(EventKind kind);

struct Event {
  double time;
  EventKind kind;
  // Set when this event landed within the merge window (1e-13) of another
  // and both state changes were applied at one segment boundary.
  bool merged = false;
};

// One exponential piece x(t) = alpha + beta * exp(-mu (t - t_start)).
// beta is anchored at t_start so large horizons never exponentiate +mu*t.
struct ExpSegment {
  double t_start;
  double t_end;
  double alpha;
  double beta;

  double eval(double mu, double t) const;
};

struct Trajectory {
  Params params;
  double initial_value;  // h = x(0); the history on [-1,0) shares its sign
  double horizon;
  std::vector<ExpSegment> segments;
  std::vector<Event> events;

  // Value at t in [0, horizon]. Segment ownership is [t_start, t_end), the
  // last segment is closed. Throws OutOfRange outside the horizon.
  double eval(double t) const;

  // Largest mismatch |x(t_end-) - x(t_start+)| across interior joins.
  double max_join_mismatch() const;
};

// Event-driven exact integration from x(0) = h with a sign-constant history
// (sign(h) on [-1, 0)). h may be negative; h = 0 degenerates immediately.
// Every event time is located in closed form.
Trajectory solve_exact(const Params& params, double h, double t_end);

// x(T), x(2T), ..., x(nT), restarting each period from the previous endpoint.
// Before each period the single-period shape conditions are checked; a
// violation at iterate i raises ShapeViolated(i).
std::vector<double> period_iterate(const Params& params, double h, int n);

}  // namespace relaydde
