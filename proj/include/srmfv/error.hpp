#pragma once

#include <stdexcept>
#include <string>

namespace srmfv {

// Shape or dimension mismatch between tensors.
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration value (out-of-range hyperparameter, unknown key).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Corrupt or incompatible serialized file.
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: non-finite values, degenerate reductions, misuse of
// the differentiation machinery.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace srmfv
