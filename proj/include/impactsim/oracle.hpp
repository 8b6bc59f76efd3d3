#pragma once

#include <vector>

#include "impactsim/common.hpp"
#include "impactsim/geometry.hpp"
#include "impactsim/scheme.hpp"

namespace impactsim::oracle {

struct EventDrivenConfig {
  double rk_step = 1e-4;     // smooth-phase RK4 step
  double event_tol = 1e-10;  // bisection tolerance on |phi|
  int max_events = 1000;
  double zeno_guard = 1e-7;  // post-impact normal speed below which motion is declared stuck
};

enum class EventStatus {
  Completed,     // reached t_end
  ZenoStop,      // post-impact normal speed fell below zeno_guard
  ZenoOverflow,  // max_events exceeded (expected near an accumulation)
};

struct OracleImpact {
  double t = 0.0;
  Vec x;
  Vec v_minus;
  Vec v_plus;
  bool impacting = true;  // false for grazing touches
};

struct EventDrivenResult {
  EventStatus status = EventStatus::Completed;
  double stop_time = 0.0;
  std::vector<double> times;
  std::vector<Vec> positions;
  std::vector<Vec> velocities;
  std::vector<OracleImpact> impacts;
};

/// Reference integrator: RK4 on M(u) u'' = f(t, u, M(u) u') between events,
/// bisection on phi for event location, and the restitution impact law at
/// each event. Cannot pass an impact accumulation; halts with ZenoStop or
/// ZenoOverflow instead.
EventDrivenResult integrate_event_driven(const scheme::InitialData& data,
                                         const scheme::ForceModel& force,
                                         const geometry::MetricField& metric,
                                         const geometry::ConstraintSpec& cs,
                                         const EventDrivenConfig& cfg, double t_end,
                                         double restitution);

/// Ball above a rigid floor under constant gravity: piecewise-parabolic
/// closed form with geometrically shrinking bounce intervals. For e < 1 the
/// bounce times accumulate at a finite time, after which the ball rests.
struct ClosedFormBall {
  double u0 = 1.0;
  double v0 = 0.0;
  double g = 10.0;
  double e = 0.5;

  double first_impact_time() const;
  double first_impact_speed() const;
  /// Accumulation time of the bounce cascade; +inf for e = 1.
  double zeno_time() const;
  /// (position, velocity) at time t >= 0.
  std::pair<double, double> eval(double t) const;
  /// Impact times up to t_max (at most max_count of them).
  std::vector<double> impact_times(double t_max, int max_count = 1000) const;
};

}  // namespace impactsim::oracle
