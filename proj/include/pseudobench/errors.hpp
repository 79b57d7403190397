#pragma once

#include <stdexcept>
#include <string>

namespace pseudobench {

// Error taxonomy. The CLI maps parameter/config problems to exit code 2 and
// data/numeric problems to exit code 3.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed file content (bad manifest field, payload size mismatch, bad schema).
struct format_error : error {
  using error::error;
};

// Input violates a documented invariant (overlapping events, un-tiled recording, ...).
struct validation_error : error {
  using error::error;
};

// Caller passed an out-of-range or inconsistent parameter.
struct parameter_error : error {
  using error::error;
};

// A numeric operation cannot proceed (non-finite input, singular system, eigenvalue <= 0).
struct numeric_error : error {
  using error::error;
};

// Filesystem failure.
struct io_error : error {
  using error::error;
};

// Iterative solver hit its iteration cap; carries the last residual.
struct convergence_error : error {
  convergence_error(const std::string& what, double residual)
      : error(what + " (residual " + std::to_string(residual) + ")"), residual(residual) {}
  double residual;
};

}  // namespace pseudobench
