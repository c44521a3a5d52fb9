#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace optomech {

/// Invalid physical parameters or schedule description.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of an operation (e.g. time outside [0, T]).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed: non-convergence, unphysical state,
/// degenerate eigensystem. Carries the simulation time when one applies.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what,
                        double time = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace optomech
