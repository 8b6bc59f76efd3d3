#include "impactsim/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "impactsim/oracle.hpp"

namespace impactsim::analysis {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct Cluster {
  std::size_t first = 0;
  std::size_t last = 0;
};

std::vector<Cluster> find_clusters(const Trajectory& traj, int join_gap) {
  std::vector<Cluster> clusters;
  bool open = false;
  Cluster current;
  std::size_t last_active = 0;
  for (std::size_t m = 0; m < traj.samples.size(); ++m) {
    if (!traj.samples[m].diag.active) continue;
    if (open && m - last_active <= static_cast<std::size_t>(join_gap) + 1) {
      current.last = m;
    } else {
      if (open) clusters.push_back(current);
      current = Cluster{m, m};
      open = true;
    }
    last_active = m;
  }
  if (open) clusters.push_back(current);
  return clusters;
}

double median(std::vector<double> values) {
  if (values.empty()) return kNan;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

ImpactScan detect_impacts(const Trajectory& traj, const geometry::ConstraintSpec& cs,
                          const geometry::MetricField& metric, const DetectOptions& opts) {
  ImpactScan scan;
  const auto clusters = find_clusters(traj, opts.join_gap);
  for (const auto& cluster : clusters) {
    if (cluster.first == 0) {
      scan.warnings.push_back("impact cluster touches the trajectory start; event omitted");
      continue;
    }
    if (cluster.last + 1 >= traj.samples.size()) {
      std::ostringstream os;
      os << "impact cluster still open at the trajectory end (steps " << cluster.first << ".."
         << cluster.last << "); event omitted";
      scan.warnings.push_back(os.str());
      continue;
    }

    // Contact point: the projected candidate of the deepest active step.
    std::size_t deepest = cluster.first;
    double worst_phi = std::numeric_limits<double>::infinity();
    for (std::size_t m = cluster.first; m <= cluster.last; ++m) {
      if (!traj.samples[m].diag.active) continue;
      const double p = cs.phi(traj.samples[m].u);
      if (p < worst_phi) {
        worst_phi = p;
        deepest = m;
      }
    }

    ImpactEvent event;
    event.first_step = cluster.first;
    event.last_step = cluster.last;
    event.t = traj.samples[deepest].t;
    event.x = traj.samples[deepest].diag.z;

    const Mat M = metric.mass_at(event.x);
    event.p_minus = M * traj.samples[cluster.first - 1].v;
    event.p_plus = M * traj.samples[cluster.last].v;

    const auto split_minus = geometry::decompose_impulse(cs, metric, event.x, event.p_minus);
    const auto split_plus = geometry::decompose_impulse(cs, metric, event.x, event.p_plus);
    const Vec g = cs.grad_phi(event.x);
    const auto llt = metric.factor_at(event.x);
    const double n_minus = event.p_minus.dot(llt.solve(g));
    const double n_plus = event.p_plus.dot(llt.solve(g));
    const double p_minus_norm = geometry::cotangent_norm(metric, event.x, event.p_minus);
    const double n_minus_norm = geometry::cotangent_norm(metric, event.x, split_minus.normal);

    if (n_minus_norm < opts.graze_rel_tol * std::max(p_minus_norm, 1e-300)) {
      event.grazing = true;
      event.measured_e = kNan;
    } else {
      event.measured_e = -n_plus / n_minus;
    }
    event.tangential_error =
        geometry::cotangent_norm(metric, event.x, split_plus.tangential - split_minus.tangential);
    event.energy_jump = geometry::kinetic_energy(metric, event.x, event.p_plus) -
                        geometry::kinetic_energy(metric, event.x, event.p_minus);
    scan.events.push_back(std::move(event));
  }
  return scan;
}

double total_variation_velocity(const Trajectory& traj) {
  double total = 0.0;
  for (std::size_t m = 1; m < traj.samples.size(); ++m) {
    total += (traj.samples[m].v - traj.samples[m - 1].v).norm();
  }
  return total;
}

EnergyTrace energy_trace(const Trajectory& traj, const geometry::MetricField& metric,
                         const std::vector<ImpactEvent>& events, double energy_tol) {
  EnergyTrace trace;
  trace.times.reserve(traj.samples.size());
  trace.energy.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    trace.times.push_back(s.t);
    trace.energy.push_back(0.5 * geometry::tangent_inner(metric, s.u, s.v, s.v));
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].energy_jump > energy_tol) trace.violating_events.push_back(i);
  }
  return trace;
}

ConvergenceReport convergence_study(const models::ModelDescriptor& model,
                                    const scheme::SchemeConfig& base,
                                    const std::vector<double>& h_values,
                                    ReferenceKind reference, int max_threads) {
  if (h_values.size() < 3) {
    throw ConfigError("convergence study needs at least 3 step sizes, got " +
                      std::to_string(h_values.size()));
  }
  for (std::size_t i = 1; i < h_values.size(); ++i) {
    if (std::abs(h_values[i] - 0.5 * h_values[i - 1]) > 1e-9 * h_values[i - 1]) {
      std::ostringstream os;
      os << "step sizes must halve: h[" << i << "] = " << h_values[i] << " is not half of h["
         << i - 1 << "] = " << h_values[i - 1];
      throw ConfigError(os.str());
    }
  }

  ConvergenceReport report;
  report.reference = reference;
  if (reference == ReferenceKind::Auto) {
    report.reference =
        model.has_closed_form ? ReferenceKind::ClosedForm : ReferenceKind::FinestGrid;
  }
  if (report.reference == ReferenceKind::ClosedForm && !model.has_closed_form) {
    throw ConfigError("model '" + model.name + "' has no closed form to compare against");
  }

  auto run_at = [&](double h) {
    scheme::SchemeConfig cfg = base;
    cfg.h = h;
    cfg.e = model.e;
    return scheme::run(model.initial, cfg, model.force, model.metric, model.constraint);
  };

  Trajectory finest;
  std::vector<analysis::ImpactEvent> finest_events;
  if (report.reference == ReferenceKind::FinestGrid) {
    finest = run_at(h_values.back());
    if (!finest.ok()) {
      report.failures.push_back("reference run at h = " + std::to_string(h_values.back()) +
                                " failed: " + finest.failure_message);
      return report;
    }
    finest_events = detect_impacts(finest, model.constraint, model.metric).events;
  }

  struct Row {
    double sup_err = kNan;
    double time_err = kNan;
    double e_err = kNan;
    std::string failure;
  };

  auto compute_row = [&](double h) {
    Row row;
    Trajectory traj = run_at(h);
    if (!traj.ok()) {
      std::ostringstream os;
      os << "h = " << h << ": " << traj.failure_message;
      row.failure = os.str();
      return row;
    }

    double sup_err = 0.0;
    if (report.reference == ReferenceKind::ClosedForm) {
      for (const auto& s : traj.samples) {
        const double ref_u = model.closed_form.eval(s.t - traj.t0).first;
        sup_err = std::max(sup_err, std::abs(s.u[0] - ref_u));
      }
    } else {
      const long ratio = std::lround(h / h_values.back());
      for (std::size_t m = 0; m < traj.samples.size(); ++m) {
        const std::size_t j = m * static_cast<std::size_t>(ratio);
        if (j >= finest.samples.size()) break;
        sup_err = std::max(sup_err, (traj.samples[m].u - finest.samples[j].u).norm());
      }
    }
    row.sup_err = sup_err;

    const auto events = detect_impacts(traj, model.constraint, model.metric).events;
    double ref_first = kNan;
    if (report.reference == ReferenceKind::ClosedForm) {
      ref_first = model.closed_form.first_impact_time() + traj.t0;
    } else if (!finest_events.empty()) {
      ref_first = finest_events.front().t;
    }
    if (!events.empty() && std::isfinite(ref_first)) {
      row.time_err = std::abs(events.front().t - ref_first);
    }
    for (const auto& ev : events) {
      if (!ev.grazing) {
        row.e_err = std::abs(ev.measured_e - model.e);
        break;
      }
    }
    return row;
  };

  const std::size_t rows =
      report.reference == ReferenceKind::FinestGrid ? h_values.size() - 1 : h_values.size();
  std::vector<Row> results(rows);
  const int workers = std::max(1, std::min<int>(max_threads, static_cast<int>(rows)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < rows; ++i) results[i] = compute_row(h_values[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < rows; i = next.fetch_add(1)) {
          results[i] = compute_row(h_values[i]);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < rows; ++i) {
    report.h_values.push_back(h_values[i]);
    report.sup_position_errors.push_back(results[i].sup_err);
    report.impact_time_errors.push_back(results[i].time_err);
    report.measured_e_errors.push_back(results[i].e_err);
    if (!results[i].failure.empty()) report.failures.push_back(results[i].failure);
  }

  std::vector<double> orders;
  for (std::size_t i = 0; i + 1 < report.sup_position_errors.size(); ++i) {
    const double a = report.sup_position_errors[i];
    const double b = report.sup_position_errors[i + 1];
    if (std::isfinite(a) && std::isfinite(b) && a > 0.0 && b > 0.0) {
      orders.push_back(std::log2(a / b));
    }
  }
  report.observed_order = median(std::move(orders));
  return report;
}

}  // namespace impactsim::analysis
