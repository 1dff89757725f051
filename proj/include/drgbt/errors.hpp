#pragma once

#include <stdexcept>
#include <string>

namespace drgbt {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct JointLimitViolation : Error {
  using Error::Error;
};

/// No spline satisfies the kinematic limits from the given initial state.
struct Infeasible : Error {
  using Error::Error;
};

struct OutOfDomain : Error {
  using Error::Error;
};

struct ZeroDirection : Error {
  using Error::Error;
};

struct ScenarioGenerationFailed : Error {
  using Error::Error;
};

/// Invalid configuration or model file. `line` is 1-based, 0 when unknown.
struct ConfigError : Error {
  ConfigError(const std::string& msg, int line_ = 0)
      : Error(line_ > 0 ? "line " + std::to_string(line_) + ": " + msg : msg), line(line_) {}
  int line{0};
};

}  // namespace drgbt
