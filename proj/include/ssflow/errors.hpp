#pragma once

#include <stdexcept>
#include <string>

namespace ssflow {

// Root of the toolkit's exception hierarchy. The CLI maps each subclass to an
// exit code; library callers may catch the specific types.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (rho <= 0, M <= 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Bernoulli base B0 - (g-1)(|Dphi|^2/2 + phi) is not positive.
class VacuumError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Caller violated a documented precondition (e.g. states not R-H connected).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Bracket search or root refinement failed; carries the scanned interval.
class SearchFailure : public Error {
 public:
  SearchFailure(const std::string& what, double lo, double hi)
      : Error(what + " [scanned " + std::to_string(lo) + ", " + std::to_string(hi) + "]"),
        lo_(lo), hi_(hi) {}
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

// Iterative solver hit its cap without meeting tolerance.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

// Configuration the solver deliberately does not handle (subsonic, detached, near-sonic).
class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent user configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ssflow
