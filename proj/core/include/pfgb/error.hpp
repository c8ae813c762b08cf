#pragma once

#include <stdexcept>
#include <string>

namespace pfgb {

/// Raised when an argument violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base class for iterative solvers that fail to meet their stopping rule.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OuterNoConvergence : public SolverError {
 public:
  using SolverError::SolverError;
};

class InnerNoConvergence : public SolverError {
 public:
  using SolverError::SolverError;
};

class InfeasibleGamma : public SolverError {
 public:
  using SolverError::SolverError;
};

class NoConvergence : public SolverError {
 public:
  using SolverError::SolverError;
};

/// A scheme step failed; carries the 1-based step index.
class StepError : public std::runtime_error {
 public:
  StepError(int step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

}  // namespace pfgb
