#include "impactsim/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace impactsim::scheme {

Vec ForceModel::discrete_accel(const geometry::MetricField& metric, double t, const Vec& u,
                               const Vec& u_prev, const Vec& v, double h) const {
  if (F) return F(t, u, u_prev, v, h);
  const Mat M = metric.mass_at(u);
  return metric.factor_at(u).solve(f(t, u, M * v));
}

double ForceModel::consistency_residual(const geometry::MetricField& metric, double t,
                                        const Vec& u, const Vec& v) const {
  if (!F) return 0.0;  // derived form is consistent by construction
  const Mat M = metric.mass_at(u);
  const Vec reference = metric.factor_at(u).solve(f(t, u, M * v));
  return (F(t, u, u, v, 0.0) - reference).norm();
}

void SchemeConfig::validate() const {
  if (!(h > 0.0)) throw ConfigError("time step h must be positive, got " + std::to_string(h));
  if (!(e >= 0.0 && e <= 1.0)) {
    throw ConfigError("restitution coefficient must lie in [0, 1], got " + std::to_string(e));
  }
  if (!(fp_tol > 0.0 && fp_tol <= 1e-6)) {
    throw ConfigError("fixed-point tolerance must lie in (0, 1e-6], got " +
                      std::to_string(fp_tol));
  }
  if (fp_max_iter < 1) throw ConfigError("fp_max_iter must be at least 1");
  if (!(t_end >= t0)) {
    throw ConfigError("t_end (" + std::to_string(t_end) + ") must not precede t0 (" +
                      std::to_string(t0) + ")");
  }
}

void check_admissible(const InitialData& data, const geometry::ConstraintSpec& cs,
                      const geometry::MetricField& metric, double phi_tol) {
  const double phi0 = cs.phi(data.u0);
  if (phi0 < -phi_tol) {
    std::ostringstream os;
    os << "initial position violates phi(u0) >= 0: phi(u0) = " << phi0;
    throw AdmissibilityError(os.str());
  }
  if (phi0 <= phi_tol) {
    const Vec g = cs.grad_phi(data.u0);
    const double gp = data.p0.dot(metric.factor_at(data.u0).solve(g));
    if (gp < -1e-12) {
      std::ostringstream os;
      os << "boundary start violates <p0, dphi(u0)>* >= 0: value = " << gp;
      throw AdmissibilityError(os.str());
    }
  }
}

SchemeState init_first_steps(const InitialData& data, const SchemeConfig& cfg,
                             const ForceModel& force, const geometry::MetricField& metric,
                             const geometry::ConstraintSpec& cs) {
  check_admissible(data, cs, metric, cfg.geom.phi_tol);
  const Vec v0 = metric.apply_inverse(data.u0, data.p0);
  Vec z_h = Vec::Zero(data.u0.size());
  if (cfg.z_init == ZInitPolicy::HalfStepForce) {
    z_h = 0.5 * cfg.h * metric.apply_inverse(data.u0, force.f(data.t0, data.u0, data.p0));
  }
  SchemeState state;
  state.m = 1;
  state.t0 = data.t0;
  state.t_m = data.t0 + cfg.h;
  state.u_prev = data.u0;
  state.u_curr = data.u0 + cfg.h * v0 + cfg.h * z_h;
  return state;
}

std::pair<SchemeState, StepDiagnostics> step(const SchemeState& state, const SchemeConfig& cfg,
                                             const ForceModel& force,
                                             const geometry::MetricField& metric,
                                             const geometry::ConstraintSpec& cs) {
  const double h = cfg.h;
  const double e = cfg.e;
  const double h2 = h * h;
  const Vec& u = state.u_curr;
  const Vec& up = state.u_prev;

  Vec v = (u - up) / h;  // seed with the previous discrete velocity
  const double guard = 1e9 * (1.0 + v.norm());

  Vec u_next, w, z, accel;
  bool active = false;
  int iters = 0;
  double prev_diff = std::numeric_limits<double>::quiet_NaN();
  double contraction = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;

  try {
    for (iters = 1; iters <= cfg.fp_max_iter; ++iters) {
      const Vec v_mid = (u + h * v - up) / (2.0 * h);
      accel = force.discrete_accel(metric, state.t_m, u, up, v_mid, h);
      w = (2.0 * u - (1.0 - e) * up + h2 * accel) / (1.0 + e);
      if (cs.phi(w) >= 0.0) {
        active = false;
        z = w;
        // P_K is the identity here; the update collapses to the plain
        // central difference, evaluated directly to keep it exact.
        u_next = 2.0 * u - up + h2 * accel;
      } else {
        active = true;
        z = geometry::project_boundary(cs, metric, w, cfg.projection_mode, cfg.geom).position;
        u_next = -e * up + (1.0 + e) * z;
      }
      const Vec v_new = (u_next - u) / h;
      const double diff = (v_new - v).norm();
      if (std::isfinite(prev_diff) && prev_diff > 0.0) contraction = diff / prev_diff;
      prev_diff = diff;
      v = v_new;
      if (!v.allFinite() || v.norm() > guard) {
        std::ostringstream os;
        os << "fixed point diverged at step " << state.m << " (t = " << state.t_m
           << ", contraction estimate " << contraction << "); reduce the time step h";
        throw StepError(os.str(), state.m, contraction);
      }
      if (diff <= cfg.fp_tol * (1.0 + v.norm())) {
        converged = true;
        break;
      }
    }
  } catch (const StepError&) {
    throw;
  } catch (const Error& inner) {
    std::ostringstream os;
    os << "step " << state.m << " (t = " << state.t_m << ") failed: " << inner.what();
    throw StepError(os.str(), state.m, contraction);
  }

  if (!converged) {
    std::ostringstream os;
    os << "fixed point did not converge within " << cfg.fp_max_iter << " iterations at step "
       << state.m << " (t = " << state.t_m << ", contraction estimate " << contraction
       << "); reduce the time step h";
    throw StepError(os.str(), state.m, contraction);
  }

  StepDiagnostics diag;
  diag.w = w;
  diag.z = z;
  diag.v = v;
  diag.reaction_impulse = (1.0 + e) * (z - w) / h;
  diag.reaction_covector = metric.mass_at(z) * diag.reaction_impulse;
  diag.fp_iters = iters;
  diag.active = active;
  const double phi_next = cs.phi(u_next);
  if (phi_next < 0.0) {
    const double gnorm = cs.grad_phi(u_next).norm();
    diag.penetration = -phi_next / std::max(gnorm, 1e-14);
  }

  SchemeState next;
  next.m = state.m + 1;
  next.t0 = state.t0;
  next.t_m = state.t0 + static_cast<double>(next.m) * cfg.h;
  next.u_prev = u;
  next.u_curr = u_next;
  return {next, diag};
}

Trajectory run(const InitialData& data, const SchemeConfig& cfg, const ForceModel& force,
               const geometry::MetricField& metric, const geometry::ConstraintSpec& cs) {
  cfg.validate();
  const double span = cfg.t_end - data.t0;
  const double ratio = span / cfg.h;
  const long n = static_cast<long>(std::floor(ratio + 1e-9 * (1.0 + ratio)));

  Trajectory traj;
  traj.t0 = data.t0;
  traj.h = cfg.h;
  traj.dim = static_cast<int>(data.u0.size());
  traj.restitution = cfg.e;
  if (n <= 0) {
    check_admissible(data, cs, metric, cfg.geom.phi_tol);
    traj.final_position = data.u0;
    return traj;
  }

  SchemeState state = init_first_steps(data, cfg, force, metric, cs);
  traj.samples.reserve(static_cast<std::size_t>(n));

  TrajectorySample first;
  first.t = data.t0;
  first.u = data.u0;
  first.v = (state.u_curr - state.u_prev) / cfg.h;
  first.diag.w = data.u0;
  first.diag.z = data.u0;
  first.diag.v = first.v;
  first.diag.reaction_impulse = Vec::Zero(traj.dim);
  first.diag.reaction_covector = Vec::Zero(traj.dim);
  traj.samples.push_back(std::move(first));

  while (state.m <= n - 1) {
    TrajectorySample sample;
    sample.t = state.t_m;
    sample.u = state.u_curr;
    try {
      auto [next, diag] = step(state, cfg, force, metric, cs);
      sample.v = diag.v;
      sample.diag = std::move(diag);
      traj.samples.push_back(std::move(sample));
      state = std::move(next);
    } catch (const StepError& failure) {
      traj.status = RunStatus::StepFailure;
      traj.failed_step = failure.step_index;
      traj.failure_message = failure.what();
      break;
    } catch (const Error& failure) {
      traj.status = RunStatus::StepFailure;
      traj.failed_step = state.m;
      traj.failure_message = failure.what();
      break;
    }
  }
  traj.final_position = state.u_curr;
  return traj;
}

double scalar_clamped_step(double y_prev, double y_curr, double lambda, double e, double h) {
  return -e * y_prev + std::max(2.0 * y_curr - (1.0 - e) * y_prev, 0.0) + h * h * lambda;
}

namespace {

// xorshift-free uniform from the engine's raw 64-bit output; keeps the draw
// sequence independent of the standard library's distribution internals.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

VelocityBoundReport check_velocity_bound(long count, std::uint64_t seed, int steps,
                                         double lambda_max, double slack) {
  if (count < 1) throw ConfigError("velocity-bound check needs count >= 1");
  if (steps < 3) throw ConfigError("velocity-bound check needs at least 3 steps");

  VelocityBoundReport report;
  report.cases_requested = count;
  report.seed = seed;
  std::mt19937_64 rng(seed);

  for (long c = 0; c < count; ++c) {
    const double h = std::pow(10.0, -3.0 + 2.0 * uniform01(rng));  // in [1e-3, 1e-1]
    const double e = uniform01(rng);
    const double y0 = -1.0 + 2.0 * uniform01(rng);
    const double eta0 = -2.0 + 4.0 * uniform01(rng);
    double y_prev = y0;
    double y_curr = y0 + h * eta0;
    double lambda_prev = 0.0;
    double eta_prev2 = 0.0;
    double eta_prev = eta0;
    ++report.cases_run;

    for (int m = 1; m <= steps; ++m) {
      const double lambda = lambda_max * (2.0 * uniform01(rng) - 1.0);
      const double y_next = scalar_clamped_step(y_prev, y_curr, lambda, e, h);
      const double eta = (y_next - y_curr) / h;
      if (m >= 2) {
        const double lhs = std::abs(eta);
        const double rhs = std::max(std::abs(eta_prev), e * std::abs(eta_prev2)) +
                           h * (std::abs(lambda) + std::abs(lambda_prev));
        if (lhs > rhs + slack) {
          report.passed = false;
          report.case_index = c;
          report.step_index = m;
          report.lhs = lhs;
          report.rhs = rhs;
          report.e = e;
          report.h = h;
          return report;
        }
      }
      y_prev = y_curr;
      y_curr = y_next;
      eta_prev2 = eta_prev;
      eta_prev = eta;
      lambda_prev = lambda;
    }
  }
  return report;
}

}  // namespace impactsim::scheme
