#pragma once

#include <stdexcept>
#include <string>

namespace dgp {

// Invalid configuration or malformed input; the CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure (factorization breakdown, solver non-convergence);
// carries the offending magnitude. The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double magnitude)
      : std::runtime_error(what), magnitude_(magnitude) {}
  double magnitude() const noexcept { return magnitude_; }

 private:
  double magnitude_;
};

}  // namespace dgp
