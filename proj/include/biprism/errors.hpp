#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace biprism {

/// Model or operation parameters outside their valid domain.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Grid cannot represent the requested propagation without aliasing.
/// Carries the smallest grid size that would satisfy the guard-band rule.
struct SamplingError : std::runtime_error {
  std::size_t required_points;
  SamplingError(const std::string& msg, std::size_t required)
      : std::runtime_error(msg), required_points(required) {}
};

/// Nonlinear fit did not converge within the iteration budget.
struct FitError : std::runtime_error {
  double last_residual;
  explicit FitError(const std::string& msg, double residual = 0.0)
      : std::runtime_error(msg), last_residual(residual) {}
};

/// Pattern has too few extrema to measure fringes.
struct NoFringeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// SSE landscape too flat to identify the observation distance.
struct UnidentifiableZError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Not enough runs/records for the requested statistic.
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File could not be read, parsed or written.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace biprism
