#pragma once

#include <vector>

#include "relaydde/params.hpp"

namespace testsupport {

struct AdmissibleSample {
  relaydde::Params params;
  double h;
};

// Random parameter sets for which the single-period map hypotheses hold,
// the transit shape is valid both at the sampled h and at the fixed point.
std::vector<AdmissibleSample> sample_single(int count, unsigned seed);

// Same for the double-period (antisymmetric) regime.
std::vector<AdmissibleSample> sample_double(int count, unsigned seed);

}  // namespace testsupport
