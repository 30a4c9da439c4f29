#ifndef MANIF_ERRORS_HPP
#define MANIF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace manif {

// Mismatched vector lengths, layer sizes, or index ranges.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Invalid configuration values (non-positive counts, out-of-range knobs).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Non-finite intermediates or undefined numeric operations.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input files. The code pins down which rule was violated so
// callers and tests can tell the failure modes apart.
struct FormatError : std::runtime_error {
  enum class Code { bad_magic, truncated, count_mismatch, bad_value };
  Code code;
  FormatError(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

// An iterative routine exhausted its sweep budget before converging.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace manif

#endif
