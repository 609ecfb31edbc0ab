#pragma once

#include <stdexcept>
#include <string>

namespace mtia {

// Error categories map onto the CLI exit codes: config 2, io 3, numeric 4.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failures: non-finite values, divergence, shape/dimension mismatch.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeError : NumericError {
  explicit ShapeError(const std::string& msg) : NumericError(msg) {}
};

}  // namespace mtia
