#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "impactsim/common.hpp"
#include "impactsim/geometry.hpp"
#include "impactsim/trajectory.hpp"

namespace impactsim::scheme {

/// Continuous force f(t, u, p) and its discrete counterpart
/// F(t, u, u_prev, v, h). When F is not supplied it is derived as
/// F = M(u)^{-1} f(t, u, M(u) v), which is consistent with f by construction.
struct ForceModel {
  std::function<Vec(double, const Vec&, const Vec&)> f;
  std::function<Vec(double, const Vec&, const Vec&, const Vec&, double)> F;  // optional

  Vec discrete_accel(const geometry::MetricField& metric, double t, const Vec& u,
                     const Vec& u_prev, const Vec& v, double h) const;

  /// |F(t,u,u,v,0) - M(u)^{-1} f(t,u,M(u)v)|, zero for the derived default.
  double consistency_residual(const geometry::MetricField& metric, double t, const Vec& u,
                              const Vec& v) const;

  bool has_custom_F() const { return static_cast<bool>(F); }
};

enum class ZInitPolicy {
  HalfStepForce,  // z(h) = (h/2) M(u0)^{-1} f(t0, u0, p0)
  Zero,
};

struct SchemeConfig {
  double h = 1e-3;
  double e = 0.5;   // restitution
  double t0 = 0.0;
  double t_end = 1.0;
  double fp_tol = 1e-10;
  int fp_max_iter = 100;
  geometry::ProjectionMode projection_mode = geometry::ProjectionMode::FrozenMetric;
  ZInitPolicy z_init = ZInitPolicy::HalfStepForce;
  geometry::GeometryTolerances geom;

  void validate() const;  // throws ConfigError
};

struct InitialData {
  double t0 = 0.0;
  Vec u0;
  Vec p0;
};

/// Checks admissibility: u0 in K and, when u0 sits on the boundary,
/// <p0, dphi(u0)>* >= -1e-12. Throws AdmissibilityError quoting the
/// violated inequality.
void check_admissible(const InitialData& data, const geometry::ConstraintSpec& cs,
                      const geometry::MetricField& metric, double phi_tol = 1e-9);

/// Rolling pair of positions (U^{m-1}, U^m) at t_m = t0 + m h.
struct SchemeState {
  long m = 0;
  double t0 = 0.0;
  double t_m = 0.0;  // always t0 + m h, by index arithmetic
  Vec u_prev;
  Vec u_curr;
};

/// Builds U^0 = u0 and U^1 = u0 + h M(u0)^{-1} p0 + h z(h); returns the
/// state at m = 1.
SchemeState init_first_steps(const InitialData& data, const SchemeConfig& cfg,
                             const ForceModel& force, const geometry::MetricField& metric,
                             const geometry::ConstraintSpec& cs);

/// One implicit projection step: solves
///   u_next = -e u_prev + (1+e) P_K((2 u - (1-e) u_prev + h^2 F) / (1+e))
/// by Picard iteration on the forward-difference velocity. Throws StepError
/// when the iteration diverges or exceeds fp_max_iter.
std::pair<SchemeState, StepDiagnostics> step(const SchemeState& state, const SchemeConfig& cfg,
                                             const ForceModel& force,
                                             const geometry::MetricField& metric,
                                             const geometry::ConstraintSpec& cs);

/// Integrates over [t0, t_end] on the grid t_m = t0 + m h. On step failure
/// the partial trajectory is returned with status = StepFailure.
Trajectory run(const InitialData& data, const SchemeConfig& cfg, const ForceModel& force,
               const geometry::MetricField& metric, const geometry::ConstraintSpec& cs);

/// One step of the scalar clamped recurrence
///   y_next = -e y_prev + (2 y_curr - (1-e) y_prev)^+ + h^2 lambda.
double scalar_clamped_step(double y_prev, double y_curr, double lambda, double e, double h);

/// Result of the randomized discrete-velocity-bound check.
struct VelocityBoundReport {
  long cases_requested = 0;
  long cases_run = 0;
  bool passed = true;
  // first counterexample, if any
  long case_index = -1;
  int step_index = -1;
  double lhs = 0.0;
  double rhs = 0.0;
  double e = 0.0;
  double h = 0.0;
  std::uint64_t seed = 0;
};

/// Runs `count` random instances of the scalar clamped recurrence over
/// `steps` steps each and verifies that every discrete velocity satisfies
///   |eta_m| <= max(|eta_{m-1}|, e |eta_{m-2}|) + h (|lambda_m| + |lambda_{m-1}|)
/// up to `slack` roundoff.
VelocityBoundReport check_velocity_bound(long count, std::uint64_t seed, int steps = 200,
                                         double lambda_max = 10.0, double slack = 1e-12);

}  // namespace impactsim::scheme
