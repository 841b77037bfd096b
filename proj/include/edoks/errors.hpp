#pragma once

#include <stdexcept>
#include <string>

namespace edoks {

// Bad arguments: empty images, out-of-range parameters, malformed records.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// A MetricConfig (or CLI override) that violates its invariants.
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// File could not be read or decoded as an image.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Transportation solver failed to reach optimality. Should not happen for
// feasible problems; carries diagnostics in what().
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace edoks
