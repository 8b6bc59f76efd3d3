#pragma once

#include <functional>

#include "impactsim/common.hpp"

namespace impactsim::geometry {

/// Shared numerical knobs for boundary geometry.
struct GeometryTolerances {
  double phi_tol = 1e-9;        // boundary membership: |phi| <= phi_tol
  double newton_tol = 1e-12;    // residual tolerance of the projection Newton
  int max_newton = 40;
  double fd_step_scale = 1e-5;  // central-difference step = scale * (1 + |u|)
  int geodesic_substeps = 32;   // RK4 substeps per geodesic shot
};

/// The feasible set K = { u : phi(u) >= 0 }, with first and (optionally)
/// second derivatives of phi. When hess_phi is not supplied it is replaced
/// by central differences of grad_phi.
struct ConstraintSpec {
  std::function<double(const Vec&)> phi;
  std::function<Vec(const Vec&)> grad_phi;
  std::function<Mat(const Vec&)> hess_phi;  // optional

  Mat hessian_at(const Vec& u, const GeometryTolerances& tol = {}) const;
};

/// Position-dependent mass matrix M(u). M defines the tangent inner product
/// x^T M(u) y and, through its inverse, the cotangent inner product.
/// d_mass(u, i) is the partial derivative of M with respect to coordinate i;
/// when absent it is approximated by central differences.
struct MetricField {
  std::function<Mat(const Vec&)> mass;
  std::function<Mat(const Vec&, int)> d_mass;  // optional

  /// Evaluates M(u) and verifies symmetry; throws MetricError otherwise.
  Mat mass_at(const Vec& u) const;
  /// Cholesky factor of M(u); throws MetricError when not positive definite.
  Eigen::LLT<Mat> factor_at(const Vec& u) const;
  /// M(u)^{-1} xi.
  Vec apply_inverse(const Vec& u, const Vec& xi) const;
  Mat d_mass_at(const Vec& u, int i, const GeometryTolerances& tol = {}) const;
};

/// A point of the boundary together with the interior unit normal N(x),
/// normalized so |N|_x = 1 in the tangent metric.
struct BoundaryPoint {
  Vec position;
  Vec inward_normal;
};

enum class ProjectionMode {
  FrozenMetric,  // KKT Newton on min (y-x)^T M(x) (y-x) s.t. phi(y) = 0
  Geodesic,      // shooting on the geodesic normal to the boundary (validation)
};

double tangent_inner(const MetricField& metric, const Vec& u, const Vec& x, const Vec& y);
double tangent_norm(const MetricField& metric, const Vec& u, const Vec& x);
double cotangent_inner(const MetricField& metric, const Vec& u, const Vec& xi, const Vec& eta);
double cotangent_norm(const MetricField& metric, const Vec& u, const Vec& xi);

/// Kinetic energy of the impulsion p at u: E(u, p) = (1/2) <p, p>*_u.
double kinetic_energy(const MetricField& metric, const Vec& u, const Vec& p);

/// Interior unit normal at a boundary point x (|phi(x)| <= phi_tol).
BoundaryPoint inward_normal(const ConstraintSpec& cs, const MetricField& metric, const Vec& x,
                            const GeometryTolerances& tol = {});

/// Nearest boundary point in the Riemannian sense. FrozenMetric solves the
/// KKT system of the quadratic nearest-point problem with the metric frozen
/// at x; Geodesic shoots boundary-normal geodesics until one hits x.
BoundaryPoint project_boundary(const ConstraintSpec& cs, const MetricField& metric, const Vec& x,
                               ProjectionMode mode = ProjectionMode::FrozenMetric,
                               const GeometryTolerances& tol = {});

/// Identity on K, project_boundary outside of it.
Vec project_K(const ConstraintSpec& cs, const MetricField& metric, const Vec& x,
              ProjectionMode mode = ProjectionMode::FrozenMetric,
              const GeometryTolerances& tol = {});

struct ImpulseSplit {
  Vec normal;      // component along span{dphi(x)}
  Vec tangential;  // cotangent-orthogonal remainder
};

/// Splits a covector p at the boundary point x into its normal and
/// tangential parts with respect to the cotangent metric at x.
ImpulseSplit decompose_impulse(const ConstraintSpec& cs, const MetricField& metric, const Vec& x,
                               const Vec& p, const GeometryTolerances& tol = {});

struct ImpactOutcome {
  Vec p_plus;
  bool impacting = false;  // false when p_minus was already separating
};

/// Restitution impact law: the tangential part of the impulsion is kept,
/// the normal part is reversed and scaled by e. A separating impulsion
/// (<dphi(x), p>* > 0) is returned unchanged.
ImpactOutcome impact_map(const ConstraintSpec& cs, const MetricField& metric, const Vec& x,
                         const Vec& p_minus, double e, const GeometryTolerances& tol = {});

/// Acceleration -Gamma(u)(w, w) of the geodesic equation for the metric M.
Vec geodesic_acceleration(const MetricField& metric, const Vec& u, const Vec& w,
                          const GeometryTolerances& tol = {});

/// Endpoint of the geodesic from z with initial velocity w0 after parameter
/// length s (RK4, fixed substep count).
Vec geodesic_point(const MetricField& metric, const Vec& z, const Vec& w0, double s,
                   const GeometryTolerances& tol = {});

}  // namespace impactsim::geometry
