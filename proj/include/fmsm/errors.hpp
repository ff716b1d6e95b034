#pragma once

#include <stdexcept>
#include <string>

namespace fmsm {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Coincident filaments passed to the mutual-inductance formula.
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Invalid geometry, parameter set, scenario description or config key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the adaptive integrator cannot make progress.
class StiffnessError : public std::runtime_error {
 public:
  StiffnessError(const std::string& what, double t, double h)
      : std::runtime_error(what), time_(t), step_(h) {}
  [[nodiscard]] double time() const noexcept { return time_; }
  [[nodiscard]] double step() const noexcept { return step_; }

 private:
  double time_;
  double step_;
};

/// Setpoint program could not capture a target height before its timeout.
class UnreachableSetpoint : public std::runtime_error {
 public:
  UnreachableSetpoint(const std::string& what, double target_gap, double t)
      : std::runtime_error(what), target_(target_gap), time_(t) {}
  [[nodiscard]] double target_gap() const noexcept { return target_; }
  [[nodiscard]] double time() const noexcept { return time_; }

 private:
  double target_;
  double time_;
};

}  // namespace fmsm
