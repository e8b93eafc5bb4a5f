#pragma once

#include <stdexcept>
#include <string>

namespace dkdv {

/// Invalid parameters passed to a constructor or operation.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two objects that must share a grid (or time samples) do not.
class GridMismatch : public std::invalid_argument {
 public:
  explicit GridMismatch(const std::string& what)
      : std::invalid_argument("grid mismatch: " + what) {}
};

/// An analysis was asked to run on data that does not satisfy its
/// preconditions (empty series, nonpositive energy in a fit window, ...).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dkdv
