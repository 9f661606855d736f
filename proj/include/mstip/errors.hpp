#pragma once

#include <stdexcept>
#include <string>

namespace mstip {

// Base for every error raised by the library. The CLI maps subclasses to exit
// codes: ConfigError -> 2, analysis failures -> 3, NumericalError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration (grid too coarse, malformed scenario, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A connected component of the grid has no Dirichlet data.
class UnderdeterminedError : public Error {
 public:
  using Error::Error;
};

// Linear solver failed to reach its tolerance.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, long iterations, double residual)
      : Error(what), iterations_(iterations), residual_(residual) {}

  long iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  long iterations_;
  double residual_;
};

// No escaping path exists: the start point is enclosed by the crack set.
class EnclosureError : public Error {
 public:
  using Error::Error;
};

// Not enough grid nodes to resolve the requested window.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

}  // namespace mstip
