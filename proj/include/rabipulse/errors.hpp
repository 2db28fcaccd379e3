#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rabipulse {

/// Invalid model input: level data, pulse parameters, out-of-domain arguments.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent scenario text. Carries the 1-based line number
/// when the problem can be attributed to one line (0 otherwise).
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Numerical failure: non-convergence, step-size underflow, singular model.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, std::vector<double> history = {})
      : std::runtime_error(what), history_(std::move(history)) {}

  /// Iterate history for fixed-point failures (empty otherwise).
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace rabipulse
