#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace relaydde {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct NonPositiveParameter {
  std::string name;
  double value;
};

// Thrown by validate_params; carries every violated constraint, not just the first.
class InvalidParameters : public Error {
public:
  std::vector<NonPositiveParameter> violations;
  explicit InvalidParameters(std::vector<NonPositiveParameter> v, const std::string& msg)
      : Error(msg), violations(std::move(v)) {}
};

class OutOfRange : public Error {
public:
  using Error::Error;
};

// Identically-zero exponential piece: the forcing and the state vanished together.
class DegenerateSegment : public Error {
public:
  using Error::Error;
};

class ShapeViolated : public Error {
public:
  int iterate_index;
  ShapeViolated(int index, const std::string& msg) : Error(msg), iterate_index(index) {}
};

class HypothesisFailed : public Error {
public:
  std::vector<std::string> failed;
  HypothesisFailed(std::vector<std::string> f, const std::string& msg)
      : Error(msg), failed(std::move(f)) {}
};

class DeltaTooLarge : public Error {
public:
  using Error::Error;
};

class WindowTooWide : public Error {
public:
  using Error::Error;
};

class NoAdmissibleMixing : public Error {
public:
  using Error::Error;
};

class NoConvergence : public Error {
public:
  using Error::Error;
};

class GridMisaligned : public Error {
public:
  using Error::Error;
};

class NonFiniteState : public Error {
public:
  using Error::Error;
};

}  // namespace relaydde
