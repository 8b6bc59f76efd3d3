#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "impactsim/analysis.hpp"
#include "impactsim/common.hpp"
#include "impactsim/geometry.hpp"
#include "impactsim/scheme.hpp"
#include "impactsim/trajectory.hpp"

namespace impactsim::io {

/// Everything a CLI run needs, parsed from a JSON config file.
struct RunConfig {
  std::string model_name = "bouncing_ball";
  std::map<std::string, double> model_params;

  scheme::SchemeConfig scheme;
  bool scheme_e_overridden = false;  // scheme.e normally follows the model

  std::vector<double> h_values;  // converge only
  analysis::ReferenceKind reference = analysis::ReferenceKind::Auto;

  std::string trajectory_csv = "trajectory.csv";
  std::string impacts_csv = "impacts.csv";
  std::string convergence_csv = "convergence.csv";

  bool oracle_check = false;  // also run the event-driven reference
  std::uint64_t seed = 12345;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

/// Doubles rendered with 17 significant digits (exact round trip).
std::string format_double(double value);

/// Column-wise view of a trajectory as it appears in the trajectory CSV:
/// t, u_1..u_d, v_1..v_d, phi, energy, reaction_norm, active, fp_iters.
struct TrajectoryTable {
  int dim = 0;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

TrajectoryTable make_trajectory_table(const Trajectory& traj, const geometry::ConstraintSpec& cs,
                                      const geometry::MetricField& metric);

void write_trajectory_csv(const std::string& path, const TrajectoryTable& table);
TrajectoryTable read_trajectory_csv(const std::string& path);

/// Impacts CSV: t, x_1..x_d, measured_e, tangential_error, energy_jump.
/// Grazing events carry no measurable restitution and are skipped.
void write_impacts_csv(const std::string& path, const std::vector<analysis::ImpactEvent>& events,
                       int dim);

/// Convergence CSV: h, sup_err, impact_time_err, measured_e_err.
void write_convergence_csv(const std::string& path, const analysis::ConvergenceReport& report);

}  // namespace impactsim::io
