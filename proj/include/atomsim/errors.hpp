#pragma once

#include <stdexcept>
#include <string>

namespace atomsim {

// Bad user input or schema violation. Maps to CLI exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure: step underflow, invariant violation, non-convergence.
// Maps to CLI exit code 1.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public SolverError {
 public:
  ConvergenceError(const std::string& what, double achieved)
      : SolverError(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

}  // namespace atomsim
