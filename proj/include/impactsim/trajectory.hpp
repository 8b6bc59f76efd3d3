#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "impactsim/common.hpp"

namespace impactsim {

/// Per-step byproducts of the implicit projection step.
struct StepDiagnostics {
  Vec w;                  // pre-projection candidate
  Vec z;                  // projected candidate, z = P_K(w)
  Vec v;                  // discrete velocity (u_next - u_curr) / h
  Vec reaction_impulse;   // (1+e) (z - w) / h, tangent-vector form
  Vec reaction_covector;  // the same impulse mapped through M(z)
  int fp_iters = 0;
  bool active = false;    // w left K and was projected
  double penetration = 0.0;  // Euclidean estimate of dist(u_next, K)
};

struct TrajectorySample {
  double t = 0.0;
  Vec u;  // position
  Vec v;  // forward-difference velocity at t
  StepDiagnostics diag;
};

enum class RunStatus { Ok, StepFailure };

struct Trajectory {
  double t0 = 0.0;
  double h = 0.0;
  int dim = 0;
  double restitution = 0.0;
  std::vector<TrajectorySample> samples;
  Vec final_position;  // position one step past the last sample

  RunStatus status = RunStatus::Ok;
  long failed_step = -1;
  std::string failure_message;

  bool ok() const { return status == RunStatus::Ok; }
  std::size_t size() const { return samples.size(); }

  double max_penetration() const {
    double worst = 0.0;
    for (const auto& s : samples) worst = std::max(worst, s.diag.penetration);
    return worst;
  }
};

}  // namespace impactsim
