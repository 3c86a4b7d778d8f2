#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace speclab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid domain parameters, disconnected unions, points outside a domain.
class GeometryError : public Error {
public:
  using Error::Error;
};

/// Mesh size too coarse for the geometry.
class ResolutionError : public Error {
public:
  using Error::Error;
};

class AssemblyError : public Error {
public:
  using Error::Error;
};

/// Iterative method failed. Carries the best residuals reached, if any.
class SolverError : public Error {
public:
  explicit SolverError(const std::string& what, std::vector<double> residuals = {})
      : Error(what), residuals_(std::move(residuals)) {}

  const std::vector<double>& residuals() const noexcept { return residuals_; }

private:
  std::vector<double> residuals_;
};

/// A quantity was requested outside the range where it is defined
/// (e.g. a bound evaluated below its validity threshold).
class DomainError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace speclab
