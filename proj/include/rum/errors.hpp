#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rum {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid alternative count, mask, or option value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data (vector files, non-normalized choice vectors).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A barrier diagonal with a non-positive or non-finite entry.
class InvalidBarrierError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf appeared inside an iterative solve.
class NumericalBreakdown : public Error {
 public:
  NumericalBreakdown(const std::string& what, std::size_t iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// An operator violated its SPD contract (negative curvature detected).
class OperatorContractError : public Error {
 public:
  OperatorContractError(const std::string& what, std::size_t iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// An iterative solve did not reach its tolerance where the caller required it.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// An instance tripped a degeneracy guard (strict complementarity, interior
/// centering point) and no usable alternative was found.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace rum
