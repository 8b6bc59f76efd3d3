#include "impactsim/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace impactsim::io {

using nlohmann::json;

namespace {

geometry::ProjectionMode parse_projection_mode(const std::string& text) {
  if (text == "frozen-metric") return geometry::ProjectionMode::FrozenMetric;
  if (text == "geodesic") return geometry::ProjectionMode::Geodesic;
  throw ConfigError("projection_mode must be 'frozen-metric' or 'geodesic', got '" + text + "'");
}

std::string projection_mode_name(geometry::ProjectionMode mode) {
  return mode == geometry::ProjectionMode::FrozenMetric ? "frozen-metric" : "geodesic";
}

scheme::ZInitPolicy parse_z_init(const std::string& text) {
  if (text == "half-step-force") return scheme::ZInitPolicy::HalfStepForce;
  if (text == "zero") return scheme::ZInitPolicy::Zero;
  throw ConfigError("z_init must be 'half-step-force' or 'zero', got '" + text + "'");
}

std::string z_init_name(scheme::ZInitPolicy policy) {
  return policy == scheme::ZInitPolicy::HalfStepForce ? "half-step-force" : "zero";
}

analysis::ReferenceKind parse_reference(const std::string& text) {
  if (text == "auto") return analysis::ReferenceKind::Auto;
  if (text == "closed-form") return analysis::ReferenceKind::ClosedForm;
  if (text == "finest-grid") return analysis::ReferenceKind::FinestGrid;
  throw ConfigError("reference must be 'auto', 'closed-form' or 'finest-grid', got '" + text +
                    "'");
}

std::string reference_name(analysis::ReferenceKind kind) {
  switch (kind) {
    case analysis::ReferenceKind::ClosedForm: return "closed-form";
    case analysis::ReferenceKind::FinestGrid: return "finest-grid";
    default: return "auto";
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& ex) {
    throw ConfigError("config key '" + key + "': " + ex.what());
  }
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
  }

  RunConfig config;
  if (j.contains("model")) {
    const json& jm = j.at("model");
    config.model_name = get_or<std::string>(jm, "name", config.model_name);
    if (jm.contains("params")) {
      for (const auto& [key, value] : jm.at("params").items()) {
        if (!value.is_number()) {
          throw ConfigError("model parameter '" + key + "' must be a number");
        }
        config.model_params[key] = value.get<double>();
      }
    }
  }

  if (j.contains("scheme")) {
    const json& js = j.at("scheme");
    config.scheme.h = get_or<double>(js, "h", config.scheme.h);
    config.scheme.t0 = get_or<double>(js, "t0", config.scheme.t0);
    config.scheme.t_end = get_or<double>(js, "t_end", config.scheme.t_end);
    config.scheme.fp_tol = get_or<double>(js, "fp_tol", config.scheme.fp_tol);
    config.scheme.fp_max_iter = get_or<int>(js, "fp_max_iter", config.scheme.fp_max_iter);
    if (js.contains("e")) {
      config.scheme.e = js.at("e").get<double>();
      config.scheme_e_overridden = true;
    }
    config.scheme.projection_mode =
        parse_projection_mode(get_or<std::string>(js, "projection_mode", "frozen-metric"));
    config.scheme.z_init = parse_z_init(get_or<std::string>(js, "z_init", "half-step-force"));
  }

  if (j.contains("h_values")) {
    for (const auto& value : j.at("h_values")) {
      if (!value.is_number()) throw ConfigError("h_values entries must be numbers");
      config.h_values.push_back(value.get<double>());
    }
  }
  config.reference = parse_reference(get_or<std::string>(j, "reference", "auto"));

  if (j.contains("outputs")) {
    const json& jo = j.at("outputs");
    config.trajectory_csv = get_or<std::string>(jo, "trajectory", config.trajectory_csv);
    config.impacts_csv = get_or<std::string>(jo, "impacts", config.impacts_csv);
    config.convergence_csv = get_or<std::string>(jo, "convergence", config.convergence_csv);
  }

  config.oracle_check = get_or<bool>(j, "oracle", config.oracle_check);
  config.seed = get_or<std::uint64_t>(j, "seed", config.seed);
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const RunConfig& config) {
  json j;
  j["model"]["name"] = config.model_name;
  j["model"]["params"] = json::object();
  for (const auto& [key, value] : config.model_params) j["model"]["params"][key] = value;
  json& js = j["scheme"];
  js["h"] = config.scheme.h;
  js["t0"] = config.scheme.t0;
  js["t_end"] = config.scheme.t_end;
  js["fp_tol"] = config.scheme.fp_tol;
  js["fp_max_iter"] = config.scheme.fp_max_iter;
  if (config.scheme_e_overridden) js["e"] = config.scheme.e;
  js["projection_mode"] = projection_mode_name(config.scheme.projection_mode);
  js["z_init"] = z_init_name(config.scheme.z_init);
  if (!config.h_values.empty()) j["h_values"] = config.h_values;
  j["reference"] = reference_name(config.reference);
  j["outputs"]["trajectory"] = config.trajectory_csv;
  j["outputs"]["impacts"] = config.impacts_csv;
  j["outputs"]["convergence"] = config.convergence_csv;
  j["oracle"] = config.oracle_check;
  j["seed"] = config.seed;
  return j.dump(2);
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

TrajectoryTable make_trajectory_table(const Trajectory& traj, const geometry::ConstraintSpec& cs,
                                      const geometry::MetricField& metric) {
  TrajectoryTable table;
  const int d = traj.dim;
  table.dim = d;
  table.columns.push_back("t");
  for (int i = 1; i <= d; ++i) table.columns.push_back("u_" + std::to_string(i));
  for (int i = 1; i <= d; ++i) table.columns.push_back("v_" + std::to_string(i));
  table.columns.insert(table.columns.end(),
                       {"phi", "energy", "reaction_norm", "active", "fp_iters"});

  table.rows.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    std::vector<double> row;
    row.reserve(table.columns.size());
    row.push_back(s.t);
    for (int i = 0; i < d; ++i) row.push_back(s.u[i]);
    for (int i = 0; i < d; ++i) row.push_back(s.v[i]);
    row.push_back(cs.phi(s.u));
    row.push_back(0.5 * geometry::tangent_inner(metric, s.u, s.v, s.v));
    row.push_back(geometry::tangent_norm(metric, s.diag.z, s.diag.reaction_impulse));
    row.push_back(s.diag.active ? 1.0 : 0.0);
    row.push_back(static_cast<double>(s.diag.fp_iters));
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_trajectory_csv(const std::string& path, const TrajectoryTable& table) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out << ",";
    out << table.columns[c];
  }
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ",";
      out << format_double(row[c]);
    }
    out << "\n";
  }
}

TrajectoryTable read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  TrajectoryTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV file '" + path + "'");
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  table.dim = static_cast<int>((table.columns.size() - 6) / 2);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(table.columns.size());
    std::stringstream cells(line);
    while (std::getline(cells, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != table.columns.size()) {
      throw ConfigError("malformed CSV row in '" + path + "'");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_impacts_csv(const std::string& path, const std::vector<analysis::ImpactEvent>& events,
                       int dim) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "t";
  for (int i = 1; i <= dim; ++i) out << ",x_" << i;
  out << ",measured_e,tangential_error,energy_jump\n";
  for (const auto& event : events) {
    if (event.grazing) continue;
    out << format_double(event.t);
    for (int i = 0; i < dim; ++i) out << "," << format_double(event.x[i]);
    out << "," << format_double(event.measured_e) << "," << format_double(event.tangential_error)
        << "," << format_double(event.energy_jump) << "\n";
  }
}

void write_convergence_csv(const std::string& path, const analysis::ConvergenceReport& report) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "h,sup_err,impact_time_err,measured_e_err\n";
  for (std::size_t i = 0; i < report.h_values.size(); ++i) {
    out << format_double(report.h_values[i]) << ","
        << format_double(report.sup_position_errors[i]) << ","
        << format_double(report.impact_time_errors[i]) << ","
        << format_double(report.measured_e_errors[i]) << "\n";
  }
}

}  // namespace impactsim::io
