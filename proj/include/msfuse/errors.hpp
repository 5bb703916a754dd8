#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace msfuse {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Inconsistent pattern, frame, or configuration.
struct ConfigError : Error {
  using Error::Error;
};

struct DimensionError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

/// Geometry too degenerate to solve (collinear points, parallel rays, ...).
struct DegenerateError : Error {
  using Error::Error;
};

/// Calibration views do not constrain the requested parameters.
struct ObservabilityError : Error {
  using Error::Error;
};

struct PairingError : Error {
  using Error::Error;
};

struct ProjectionError : Error {
  using Error::Error;
};

struct EmptyResultError : Error {
  using Error::Error;
};

struct DetectionError : Error {
  DetectionError(const std::string& what, std::size_t found, std::size_t expected)
      : Error(what + " (found " + std::to_string(found) + " of " + std::to_string(expected) + " corners)"),
        found(found),
        expected(expected) {}
  std::size_t found;
  std::size_t expected;
};

}  // namespace msfuse
