#pragma once

#include <stdexcept>
#include <string>

namespace hypad {

// Thrown when tensor operands or model inputs have incompatible shapes.
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on domain violations: non-finite inputs, out-of-range arguments.
struct ValueError : std::runtime_error {
  explicit ValueError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on malformed or inconsistent data files.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on invalid run configuration or checkpoint mismatches.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a training step produces a non-finite loss.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hypad
