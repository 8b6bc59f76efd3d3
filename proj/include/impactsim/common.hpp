#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace impactsim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user-supplied value: restitution out of range, bad step size, unknown model, ...
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Mass matrix failed the symmetric positive-definite requirement at a point.
class MetricError : public Error {
 public:
  MetricError(const std::string& message, Vec point)
      : Error(message), point(std::move(point)) {}
  Vec point;
};

/// Constraint gradient vanished where boundary geometry was requested.
class DegenerateBoundaryError : public Error {
 public:
  using Error::Error;
};

/// Initial data violates the admissibility conditions.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// Boundary-projection Newton did not converge; carries the last iterate.
class ProjectionError : public Error {
 public:
  ProjectionError(const std::string& message, Vec last_iterate, double residual)
      : Error(message), last_iterate(std::move(last_iterate)), residual(residual) {}
  Vec last_iterate;
  double residual = 0.0;
};

/// The implicit step could not be solved (fixed point diverged or stalled).
class StepError : public Error {
 public:
  StepError(const std::string& message, long step_index, double contraction_estimate)
      : Error(message), step_index(step_index), contraction_estimate(contraction_estimate) {}
  long step_index = -1;
  double contraction_estimate = 0.0;
};

}  // namespace impactsim
