#pragma once

#include <map>
#include <string>
#include <vector>

#include "impactsim/common.hpp"
#include "impactsim/geometry.hpp"
#include "impactsim/oracle.hpp"
#include "impactsim/scheme.hpp"

namespace impactsim::models {

/// A named benchmark system: constraint, metric, force and admissible
/// default initial data, plus a closed-form reference when one exists.
struct ModelDescriptor {
  std::string name;
  int dim = 0;
  double e = 0.5;  // restitution
  geometry::ConstraintSpec constraint;
  geometry::MetricField metric;
  scheme::ForceModel force;
  scheme::InitialData initial;
  bool has_closed_form = false;
  oracle::ClosedFormBall closed_form;  // meaningful when has_closed_form
  std::map<std::string, double> params;
};

/// d = 1, phi(u) = u, M = 1, f = -g.
ModelDescriptor model_bouncing_ball(double u0 = 1.0, double v0 = 0.0, double g = 10.0,
                                    double e = 0.5);

/// d = 2, phi(u) = R^2 - |u|^2, M = I, f = 0; start strictly inside at
/// (x0, y0) with speed along `angle`.
ModelDescriptor model_disk_billiard(double radius = 1.0, double speed = 1.0, double angle = 0.3,
                                    double e = 1.0, double x0 = 0.0, double y0 = 0.0);

/// d = 2, phi(u) = u_2, M(u) = diag(1 + u_1^2, 1), f = (-drag * p_1, -g).
/// The position-dependent metric exercises every metric-aware code path;
/// drag (default 0) adds the velocity coupling needed to stress the
/// fixed-point solver.
ModelDescriptor model_variable_mass(double e = 0.5, double g = 10.0, double drag = 0.0);

/// Registry access by name; params override the factory defaults.
/// Throws ConfigError for unknown names or parameters.
ModelDescriptor make_model(const std::string& name, const std::map<std::string, double>& params);

std::vector<std::string> model_names();
std::string model_summary(const std::string& name);

/// Construction-time checks: interior witness, SPD metric samples,
/// admissible initial data, F consistent with f. Throws on violation.
void validate_model(const ModelDescriptor& model);

}  // namespace impactsim::models
