#pragma once

#include <string_view>

#include "relaydde/errors.hpp"

namespace relaydde {

// The five equation constants of x'(t) = -mu x(t) + a(t) f(x(t-1)).
// The delay is fixed at 1; the coefficient period T = p1 + p2 is always
// recomputed from its parts, never stored.
struct Params {
  double a1;
  double a2;
  double p1;
  double p2;
  double mu;

  double period() const { return p1 + p2; }
};

// Throws InvalidParameters listing every violated positivity constraint.
// mu = 0 is rejected: every closed form downstream divides by mu.
Params validate_params(double a1, double a2, double p1, double p2, double mu);

// Plain-text config, one "key = value" per line; keys a1, a2, p1, p2, mu.
// '#' starts a comment. All five keys required, duplicates and unknown keys
// rejected.
Params params_from_config_text(std::string_view text);

// Folds t into [0, T). Negative t is shifted up by a whole number of periods
// first so the result never depends on the sign convention of fmod.
double fold_time(double t, double period);

// The T-periodic step coefficient: a1 on [0, p1), a2 on [p1, T),
// right-continuous at the switch instants.
double coefficient_at(const Params& params, double t);

// Relay feedback -sign(x): -1 for x > 0, 0 at 0, +1 for x < 0. Odd.
int relay_feedback(double x);

}  // namespace relaydde
