#pragma once

#include <stdexcept>
#include <string>

namespace gfs {

// Bad run configuration (flags, parameter ranges). CLI exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent input data. CLI exit code 3.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure inside the solver. CLI exit code 4.
struct SolverError : std::runtime_error {
  SolverError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};

}  // namespace gfs
