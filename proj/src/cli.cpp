#include "impactsim/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "impactsim/analysis.hpp"
#include "impactsim/models.hpp"
#include "impactsim/oracle.hpp"

namespace impactsim::cli {

namespace fs = std::filesystem;

namespace {

std::string join_path(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

int thread_cap(std::size_t default_count) {
  if (const char* env = std::getenv("IMPACTSIM_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && parsed >= 1) return static_cast<int>(parsed);
  }
  return static_cast<int>(std::max<std::size_t>(1, default_count));
}

std::string reference_name(analysis::ReferenceKind kind) {
  switch (kind) {
    case analysis::ReferenceKind::ClosedForm: return "closed-form";
    case analysis::ReferenceKind::FinestGrid: return "finest-grid";
    default: return "auto";
  }
}

}  // namespace

int cmd_run(const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
  io::RunConfig config;
  models::ModelDescriptor model;
  scheme::SchemeConfig cfg;
  try {
    config = io::load_config(opts.config_path);
    model = models::make_model(config.model_name, config.model_params);
    cfg = config.scheme;
    if (!config.scheme_e_overridden) cfg.e = model.e;
    cfg.validate();
    fs::create_directories(opts.out_dir);
  } catch (const Error& ex) {
    err << "config error: " << ex.what() << "\n";
    return kExitUsage;
  }

  Trajectory traj;
  try {
    traj = scheme::run(model.initial, cfg, model.force, model.metric, model.constraint);
  } catch (const Error& ex) {
    err << "config error: " << ex.what() << "\n";
    return kExitUsage;
  }

  const auto scan = analysis::detect_impacts(traj, model.constraint, model.metric);
  const auto table = io::make_trajectory_table(traj, model.constraint, model.metric);
  io::write_trajectory_csv(join_path(opts.out_dir, config.trajectory_csv), table);
  io::write_impacts_csv(join_path(opts.out_dir, config.impacts_csv), scan.events, traj.dim);

  if (!opts.quiet) {
    out << "model: " << model.name << " (d = " << model.dim << ", e = " << cfg.e << ")\n";
    out << "steps: " << traj.size() << " of h = " << cfg.h << " on [" << model.initial.t0 << ", "
        << cfg.t_end << "]\n";
    out << "max feasibility violation: " << traj.max_penetration() << "\n";
    out << "impacts detected: " << scan.events.size() << "\n";
    for (const auto& event : scan.events) {
      out << "  t = " << event.t;
      if (event.grazing) {
        out << "  grazing touch (restitution not measurable)";
      } else {
        out << "  measured_e = " << event.measured_e
            << "  tangential_error = " << event.tangential_error;
      }
      out << "\n";
    }
    for (const auto& warning : scan.warnings) out << "  note: " << warning << "\n";
  }

  if (config.oracle_check && traj.ok()) {
    oracle::EventDrivenConfig ocfg;
    ocfg.rk_step = cfg.h;
    const auto reference = oracle::integrate_event_driven(
        model.initial, model.force, model.metric, model.constraint, ocfg, cfg.t_end, cfg.e);
    if (!opts.quiet) {
      const char* status = reference.status == oracle::EventStatus::Completed ? "completed"
                           : reference.status == oracle::EventStatus::ZenoStop ? "zeno-stop"
                                                                               : "zeno-overflow";
      out << "event-driven reference: " << reference.impacts.size() << " events, status "
          << status << " at t = " << reference.stop_time << "\n";
      if (!scan.events.empty() && !reference.impacts.empty()) {
        out << "first impact time difference vs reference: "
            << std::abs(scan.events.front().t - reference.impacts.front().t) << "\n";
      }
    }
  }

  if (!traj.ok()) {
    err << "numerical failure at step " << traj.failed_step << ": " << traj.failure_message
        << "\n";
    err << "partial outputs written to " << opts.out_dir << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_converge(const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
  io::RunConfig config;
  models::ModelDescriptor model;
  scheme::SchemeConfig base;
  try {
    config = io::load_config(opts.config_path);
    model = models::make_model(config.model_name, config.model_params);
    base = config.scheme;
    if (!config.scheme_e_overridden) base.e = model.e;
    base.h = config.h_values.empty() ? base.h : config.h_values.front();
    base.validate();
    fs::create_directories(opts.out_dir);
  } catch (const Error& ex) {
    err << "config error: " << ex.what() << "\n";
    return kExitUsage;
  }

  analysis::ConvergenceReport report;
  try {
    const int threads = thread_cap(config.h_values.size());
    report = analysis::convergence_study(model, base, config.h_values, config.reference, threads);
  } catch (const Error& ex) {
    err << "config error: " << ex.what() << "\n";
    return kExitUsage;
  }

  io::write_convergence_csv(join_path(opts.out_dir, config.convergence_csv), report);

  if (!opts.quiet) {
    out << "model: " << model.name << ", reference: " << reference_name(report.reference)
        << "\n";
    for (std::size_t i = 0; i < report.h_values.size(); ++i) {
      out << "  h = " << report.h_values[i] << "  sup_err = " << report.sup_position_errors[i]
          << "  impact_time_err = " << report.impact_time_errors[i]
          << "  measured_e_err = " << report.measured_e_errors[i] << "\n";
    }
    out << "observed order: " << report.observed_order << "\n";
  }
  for (const auto& failure : report.failures) err << "run failure: " << failure << "\n";
  return report.failures.empty() ? kExitOk : kExitNumerical;
}

int cmd_lemma_check(long count, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  if (count < 1) {
    err << "lemma-check needs count >= 1, got " << count << "\n";
    return kExitUsage;
  }
  const auto report = scheme::check_velocity_bound(count, seed);
  if (report.passed) {
    out << "velocity-bound check: PASS (" << report.cases_run << " cases, seed " << report.seed
        << ")\n";
    return kExitOk;
  }
  err << "velocity-bound check: FAIL at case " << report.case_index << ", step "
      << report.step_index << " (seed " << report.seed << ")\n";
  err << "  |eta_m| = " << io::format_double(report.lhs)
      << " exceeds bound = " << io::format_double(report.rhs) << " (e = " << report.e
      << ", h = " << report.h << ")\n";
  return kExitNumerical;
}

int cmd_models(std::ostream& out) {
  for (const auto& name : models::model_names()) {
    out << models::model_summary(name) << "\n";
  }
  return kExitOk;
}

}  // namespace impactsim::cli
