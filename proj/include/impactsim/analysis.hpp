#pragma once

#include <string>
#include <vector>

#include "impactsim/common.hpp"
#include "impactsim/geometry.hpp"
#include "impactsim/models.hpp"
#include "impactsim/trajectory.hpp"

namespace impactsim::analysis {

/// One impact reconstructed from a cluster of active steps.
struct ImpactEvent {
  double t = 0.0;
  Vec x;  // boundary-projected contact position
  Vec p_minus;
  Vec p_plus;
  double measured_e = 0.0;       // NaN for grazing events
  double tangential_error = 0.0;  // |p_T(plus) - p_T(minus)|* at x
  double energy_jump = 0.0;       // E(x, p_plus) - E(x, p_minus)
  std::size_t first_step = 0;     // sample indices of the cluster
  std::size_t last_step = 0;
  bool grazing = false;           // normal incoming part too small to measure e
};

struct DetectOptions {
  int join_gap = 2;             // active runs separated by <= join_gap inactive steps merge
  double graze_rel_tol = 1e-8;  // |p_N minus|* < tol * |p_minus|* => grazing
};

struct ImpactScan {
  std::vector<ImpactEvent> events;
  std::vector<std::string> warnings;
};

/// Clusters consecutive active steps of a discrete trajectory into impact
/// events and reads the impulsion jump from the velocities straddling each
/// cluster. Clusters touching the trajectory end are reported as warnings
/// and omitted.
ImpactScan detect_impacts(const Trajectory& traj, const geometry::ConstraintSpec& cs,
                          const geometry::MetricField& metric, const DetectOptions& opts = {});

/// Sum of Euclidean norms of consecutive discrete-velocity differences.
double total_variation_velocity(const Trajectory& traj);

struct EnergyTrace {
  std::vector<double> times;
  std::vector<double> energy;  // E(u, p) = (1/2) <p, p>*_u per sample
  std::vector<std::size_t> violating_events;  // events whose energy rose by more than energy_tol
};

EnergyTrace energy_trace(const Trajectory& traj, const geometry::MetricField& metric,
                         const std::vector<ImpactEvent>& events = {}, double energy_tol = 1e-10);

enum class ReferenceKind { Auto, ClosedForm, FinestGrid };

struct ConvergenceReport {
  std::vector<double> h_values;
  std::vector<double> sup_position_errors;
  std::vector<double> impact_time_errors;  // NaN when either side has no event
  std::vector<double> measured_e_errors;   // NaN when no event
  double observed_order = 0.0;             // median of log2(err_i / err_{i+1})
  ReferenceKind reference = ReferenceKind::Auto;
  std::vector<std::string> failures;  // per-h annotations for failed runs
};

/// h-refinement study of the scheme on a model. h_values must contain at
/// least three entries, each half of the previous. The reference is the
/// model's closed form when available, otherwise the finest grid (whose own
/// row is then dropped from the report). Per-h runs execute on up to
/// max_threads threads; results are collected in deterministic order.
ConvergenceReport convergence_study(const models::ModelDescriptor& model,
                                    const scheme::SchemeConfig& base,
                                    const std::vector<double>& h_values,
                                    ReferenceKind reference = ReferenceKind::Auto,
                                    int max_threads = 1);

}  // namespace impactsim::analysis
