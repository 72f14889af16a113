// Error types shared across the toolkit.
#pragma once

#include <stdexcept>
#include <string>

namespace confstab {

// Chart Jacobian loses rank at a quadrature node.
struct DegenerateImmersionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Chart cannot supply the derivatives an operation needs.
struct UnsupportedChartError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A finite-difference result failed its Richardson consistency check.
struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Config file failed to parse or validate.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace confstab
