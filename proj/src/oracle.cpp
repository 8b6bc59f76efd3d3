#include "impactsim/oracle.hpp"

#include <cmath>
#include <limits>

namespace impactsim::oracle {

namespace {

struct Phase {
  Vec u;
  Vec v;
};

// One RK4 step of u' = v, v' = M(u)^{-1} f(t, u, M(u) v).
Phase rk4_step(const scheme::ForceModel& force, const geometry::MetricField& metric, double t,
               const Phase& s, double dt) {
  auto accel = [&](double tt, const Vec& u, const Vec& v) -> Vec {
    const Mat M = metric.mass_at(u);
    return metric.factor_at(u).solve(force.f(tt, u, M * v));
  };
  const Vec k1u = s.v;
  const Vec k1v = accel(t, s.u, s.v);
  const Vec k2u = s.v + 0.5 * dt * k1v;
  const Vec k2v = accel(t + 0.5 * dt, s.u + 0.5 * dt * k1u, k2u);
  const Vec k3u = s.v + 0.5 * dt * k2v;
  const Vec k3v = accel(t + 0.5 * dt, s.u + 0.5 * dt * k2u, k3u);
  const Vec k4u = s.v + dt * k3v;
  const Vec k4v = accel(t + dt, s.u + dt * k3u, k4u);
  Phase out;
  out.u = s.u + (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
  out.v = s.v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  return out;
}

}  // namespace

EventDrivenResult integrate_event_driven(const scheme::InitialData& data,
                                         const scheme::ForceModel& force,
                                         const geometry::MetricField& metric,
                                         const geometry::ConstraintSpec& cs,
                                         const EventDrivenConfig& cfg, double t_end,
                                         double restitution) {
  if (!(cfg.event_tol > 0.0)) throw ConfigError("event_tol must be positive");
  if (cfg.zeno_guard < 0.0) throw ConfigError("zeno_guard must be nonnegative");
  scheme::check_admissible(data, cs, metric);

  EventDrivenResult result;
  double t = data.t0;
  Phase state{data.u0, metric.apply_inverse(data.u0, data.p0)};

  auto record = [&](double tt, const Phase& s) {
    result.times.push_back(tt);
    result.positions.push_back(s.u);
    result.velocities.push_back(s.v);
  };
  record(t, state);

  int events = 0;
  while (t < t_end - 1e-15 * (1.0 + std::abs(t_end))) {
    const double dt = std::min(cfg.rk_step, t_end - t);
    Phase trial = rk4_step(force, metric, t, state, dt);
    if (cs.phi(trial.u) >= 0.0) {
      t += dt;
      state = std::move(trial);
      record(t, state);
      continue;
    }

    // Bisect the step fraction until the endpoint sits on the boundary.
    double lo = 0.0, hi = 1.0;
    double alpha_event = 1.0;
    Phase at_event = trial;
    double phi_event = cs.phi(trial.u);
    for (int it = 0; it < 200 && std::abs(phi_event) > cfg.event_tol; ++it) {
      const double mid = 0.5 * (lo + hi);
      Phase probe = rk4_step(force, metric, t, state, mid * dt);
      const double phi_mid = cs.phi(probe.u);
      if (phi_mid >= 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
      at_event = std::move(probe);
      phi_event = phi_mid;
      alpha_event = mid;
      if (hi - lo < 1e-16) break;
    }
    const double te = t + alpha_event * dt;
    // Snap onto the boundary so the impact law sees an exact contact point.
    at_event.u = geometry::project_boundary(cs, metric, at_event.u).position;

    const Vec g = cs.grad_phi(at_event.u);
    const double gnorm = geometry::cotangent_norm(metric, at_event.u, g);
    const Mat M = metric.mass_at(at_event.u);
    const Vec p_minus = M * at_event.v;
    const double normal_speed_in = p_minus.dot(metric.factor_at(at_event.u).solve(g)) / gnorm;

    OracleImpact impact;
    impact.t = te;
    impact.x = at_event.u;
    impact.v_minus = at_event.v;

    if (std::abs(normal_speed_in) <= cfg.zeno_guard) {
      // Grazing touch: clip any residual inward-negative normal component and go on.
      const Vec n = geometry::inward_normal(cs, metric, at_event.u).inward_normal;
      const double vn = geometry::tangent_inner(metric, at_event.u, at_event.v, n);
      if (vn < 0.0) at_event.v -= vn * n;
      impact.v_plus = at_event.v;
      impact.impacting = false;
      result.impacts.push_back(std::move(impact));
      if (++events > cfg.max_events) {
        result.status = EventStatus::ZenoOverflow;
        result.stop_time = te;
        record(te, at_event);
        return result;
      }
      t = te;
      state = std::move(at_event);
      record(t, state);
      continue;
    }

    if (++events > cfg.max_events) {
      result.status = EventStatus::ZenoOverflow;
      result.stop_time = te;
      record(te, at_event);
      return result;
    }

    const Vec p_plus = geometry::impact_map(cs, metric, at_event.u, p_minus, restitution).p_plus;
    at_event.v = metric.factor_at(at_event.u).solve(p_plus);
    impact.v_plus = at_event.v;
    result.impacts.push_back(std::move(impact));

    const double normal_speed_out = -restitution * normal_speed_in;
    if (normal_speed_out < cfg.zeno_guard) {
      // Too slow to leave the boundary again: declare the motion stuck and
      // keep only the tangential part.
      const Vec n = geometry::inward_normal(cs, metric, at_event.u).inward_normal;
      const double vn = geometry::tangent_inner(metric, at_event.u, at_event.v, n);
      at_event.v -= vn * n;
      result.status = EventStatus::ZenoStop;
      result.stop_time = te;
      record(te, at_event);
      return result;
    }

    t = te;
    state = std::move(at_event);
    record(t, state);
  }

  result.status = EventStatus::Completed;
  result.stop_time = t;
  return result;
}

double ClosedFormBall::first_impact_time() const {
  if (u0 <= 0.0 && v0 <= 0.0) return 0.0;
  return (v0 + std::sqrt(v0 * v0 + 2.0 * g * u0)) / g;
}

double ClosedFormBall::first_impact_speed() const {
  return std::sqrt(std::max(0.0, v0 * v0 + 2.0 * g * u0));
}

double ClosedFormBall::zeno_time() const {
  const double s1 = first_impact_speed();
  if (s1 <= 0.0) return first_impact_time();
  if (e >= 1.0) return std::numeric_limits<double>::infinity();
  return first_impact_time() + 2.0 * e * s1 / (g * (1.0 - e));
}

std::pair<double, double> ClosedFormBall::eval(double t) const {
  const double t1 = first_impact_time();
  if (t < t1) return {u0 + v0 * t - 0.5 * g * t * t, v0 - g * t};
  const double s1 = first_impact_speed();
  if (s1 <= 0.0 || e <= 0.0) return {0.0, 0.0};
  if (e < 1.0 && t >= zeno_time()) return {0.0, 0.0};
  double start = t1;
  double w = e * s1;
  while (w > 1e-300) {
    const double dur = 2.0 * w / g;
    if (t < start + dur) {
      const double s = t - start;
      return {w * s - 0.5 * g * s * s, w - g * s};
    }
    start += dur;
    w *= e;
  }
  return {0.0, 0.0};
}

std::vector<double> ClosedFormBall::impact_times(double t_max, int max_count) const {
  std::vector<double> times;
  const double t1 = first_impact_time();
  const double s1 = first_impact_speed();
  if (t1 > t_max || max_count < 1) return times;
  if (u0 <= 0.0 && v0 <= 0.0 && s1 <= 0.0) return times;  // resting from the start
  times.push_back(t1);
  double start = t1;
  double w = e * s1;
  while (w > 1e-300 && static_cast<int>(times.size()) < max_count) {
    start += 2.0 * w / g;
    if (start > t_max) break;
    times.push_back(start);
    w *= e;
  }
  return times;
}

}  // namespace impactsim::oracle
