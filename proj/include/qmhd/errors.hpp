#pragma once

#include <stdexcept>
#include <string>

namespace qmhd {

/// Two fields or boundary data sets live on different voxel domains.
class DomainMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative solve stopped before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double attained)
      : std::runtime_error(what + " (attained " + std::to_string(attained) + ")"), attained_(attained) {}
  double attained() const noexcept { return attained_; }

 private:
  double attained_;
};

/// A computable smallness condition (Neumann ratio, contraction bound) failed.
class ConditionViolation : public std::runtime_error {
 public:
  ConditionViolation(const std::string& what, double measured)
      : std::runtime_error(what + " (measured " + std::to_string(measured) + ")"), measured_(measured) {}
  double measured() const noexcept { return measured_; }

 private:
  double measured_;
};

/// The outer fixed-point loop blew up or stagnated.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qmhd
