#pragma once

#include <stdexcept>
#include <string>

namespace povm {

/// Malformed or inconsistent input (bad labels, missing probe pairs, wrong
/// dimensions). The CLI maps this to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a trustworthy result. The CLI maps
/// this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : NumericError(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace povm
