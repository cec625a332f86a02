#pragma once

#include <stdexcept>
#include <string>

namespace qtomo {

// Exit-code families used by the CLI: config -> 2, data -> 3, numerics -> 4.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Gram matrix of a frequency class lost rank; message names the offending pairs.
struct DegenerateBasisError : NumericalError {
  explicit DegenerateBasisError(const std::string& msg) : NumericalError(msg) {}
};

// Time grid cannot separate the retained beat frequencies.
struct AliasingError : NumericalError {
  explicit AliasingError(const std::string& msg) : NumericalError(msg) {}
};

// Density matrix collapsed to zero under constraint projection.
struct DegenerateStateError : NumericalError {
  explicit DegenerateStateError(const std::string& msg) : NumericalError(msg) {}
};

} // namespace qtomo
