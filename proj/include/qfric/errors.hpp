#pragma once

#include <stdexcept>
#include <string>

namespace qfric {

/// Physics-domain failure: a pole was hit or a parameter is outside its model range.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// An integral or iteration did not reach the requested tolerance.
class NonConvergence : public std::runtime_error {
public:
  NonConvergence(const std::string& what, double estimate, double error_bound)
      : std::runtime_error(what + " (estimate " + std::to_string(estimate) + ", error bound " +
                           std::to_string(error_bound) + ")"),
        estimate_(estimate), error_bound_(error_bound) {}

  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

private:
  double estimate_;
  double error_bound_;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace qfric
