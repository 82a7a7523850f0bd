#pragma once

#include <stdexcept>
#include <string>

namespace gssl {

// Tensor or image has the wrong rank, size or layout.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configuration value or argument is outside its valid range.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Interpolation system could not be solved (duplicate or degenerate centers).
class SingularSystemError : public std::runtime_error {
 public:
  SingularSystemError(const std::string& what, double rcond)
      : std::runtime_error(what), rcond_(rcond) {}
  // Reciprocal condition-number estimate of the rejected system.
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

// Training produced a non-finite loss. The message carries the diagnostic dump.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or incompatible file container.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gssl
