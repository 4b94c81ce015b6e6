#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace openqs {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters or input data (bad matrix file, asymmetric couplings, ...).
class InputError : public Error {
 public:
  explicit InputError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// An iterative method ran out of budget or hit a singular step.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A state is self-c-orthogonal to working precision but the eigenvalues were
/// not flagged as coalesced; c-normalization would be meaningless.
class NearDefectiveError : public Error {
 public:
  using Error::Error;
};

}  // namespace openqs
