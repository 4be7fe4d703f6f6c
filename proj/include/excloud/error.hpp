#pragma once

#include <stdexcept>
#include <string>

namespace excloud {

/// Bad input: malformed config, unknown keys, invalid parameter ranges.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A standing rate hypothesis required by the operation does not hold.
struct HypothesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Rate lookup beyond the prefix of a tail-less environment.
struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// A simulation hit its hard frontier/queue cap. Never silently truncated.
struct SimulationAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Truncated chain cap too small for the requested accuracy.
struct CapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace excloud
