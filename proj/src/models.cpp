#include "impactsim/models.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace impactsim::models {

namespace {

double param_or(const std::map<std::string, double>& params, const std::string& key,
                double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown_params(const std::string& model,
                           const std::map<std::string, double>& params,
                           const std::vector<std::string>& allowed) {
  for (const auto& [key, value] : params) {
    (void)value;
    bool known = false;
    for (const auto& a : allowed) {
      if (a == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      std::ostringstream os;
      os << "unknown parameter '" << key << "' for model '" << model << "' (allowed:";
      for (const auto& a : allowed) os << " " << a;
      os << ")";
      throw ConfigError(os.str());
    }
  }
}

}  // namespace

ModelDescriptor model_bouncing_ball(double u0, double v0, double g, double e) {
  ModelDescriptor m;
  m.name = "bouncing_ball";
  m.dim = 1;
  m.e = e;
  m.constraint.phi = [](const Vec& u) { return u[0]; };
  m.constraint.grad_phi = [](const Vec&) { return Vec::Ones(1); };
  m.constraint.hess_phi = [](const Vec&) { return Mat::Zero(1, 1); };
  m.metric.mass = [](const Vec&) { return Mat::Identity(1, 1); };
  m.metric.d_mass = [](const Vec&, int) { return Mat::Zero(1, 1); };
  m.force.f = [g](double, const Vec&, const Vec&) {
    Vec out(1);
    out[0] = -g;
    return out;
  };
  m.initial.t0 = 0.0;
  m.initial.u0 = Vec::Constant(1, u0);
  m.initial.p0 = Vec::Constant(1, v0);
  m.has_closed_form = true;
  m.closed_form = oracle::ClosedFormBall{u0, v0, g, e};
  m.params = {{"u0", u0}, {"v0", v0}, {"g", g}, {"e", e}};
  validate_model(m);
  return m;
}

ModelDescriptor model_disk_billiard(double radius, double speed, double angle, double e,
                                    double x0, double y0) {
  if (!(radius > 0.0)) throw ConfigError("disk radius must be positive");
  if (x0 * x0 + y0 * y0 >= radius * radius) {
    throw ConfigError("disk billiard must start strictly inside the disk");
  }
  ModelDescriptor m;
  m.name = "disk_billiard";
  m.dim = 2;
  m.e = e;
  m.constraint.phi = [radius](const Vec& u) { return radius * radius - u.squaredNorm(); };
  m.constraint.grad_phi = [](const Vec& u) { return Vec(-2.0 * u); };
  m.constraint.hess_phi = [](const Vec& u) {
    return Mat(-2.0 * Mat::Identity(u.size(), u.size()));
  };
  m.metric.mass = [](const Vec&) { return Mat::Identity(2, 2); };
  m.metric.d_mass = [](const Vec&, int) { return Mat::Zero(2, 2); };
  m.force.f = [](double, const Vec&, const Vec&) { return Vec(Vec::Zero(2)); };
  m.initial.t0 = 0.0;
  m.initial.u0 = Vec(2);
  m.initial.u0 << x0, y0;
  m.initial.p0 = Vec(2);
  m.initial.p0 << speed * std::cos(angle), speed * std::sin(angle);
  m.params = {{"radius", radius}, {"speed", speed}, {"angle", angle},
              {"e", e},           {"x0", x0},       {"y0", y0}};
  validate_model(m);
  return m;
}

ModelDescriptor model_variable_mass(double e, double g, double drag) {
  ModelDescriptor m;
  m.name = "variable_mass";
  m.dim = 2;
  m.e = e;
  m.constraint.phi = [](const Vec& u) { return u[1]; };
  m.constraint.grad_phi = [](const Vec&) {
    Vec g2(2);
    g2 << 0.0, 1.0;
    return g2;
  };
  m.constraint.hess_phi = [](const Vec&) { return Mat::Zero(2, 2); };
  m.metric.mass = [](const Vec& u) {
    Mat M = Mat::Identity(2, 2);
    M(0, 0) = 1.0 + u[0] * u[0];
    return M;
  };
  m.metric.d_mass = [](const Vec& u, int i) {
    Mat dM = Mat::Zero(2, 2);
    if (i == 0) dM(0, 0) = 2.0 * u[0];
    return dM;
  };
  m.force.f = [g, drag](double, const Vec&, const Vec& p) {
    Vec out(2);
    out << -drag * p[0], -g;
    return out;
  };
  m.initial.t0 = 0.0;
  m.initial.u0 = Vec(2);
  m.initial.u0 << 0.0, 1.0;
  m.initial.p0 = Vec(2);
  m.initial.p0 << 0.5, 0.0;
  m.params = {{"e", e}, {"g", g}, {"drag", drag}};
  validate_model(m);
  return m;
}

ModelDescriptor make_model(const std::string& name,
                           const std::map<std::string, double>& params) {
  if (name == "bouncing_ball") {
    reject_unknown_params(name, params, {"u0", "v0", "g", "e"});
    return model_bouncing_ball(param_or(params, "u0", 1.0), param_or(params, "v0", 0.0),
                               param_or(params, "g", 10.0), param_or(params, "e", 0.5));
  }
  if (name == "disk_billiard") {
    reject_unknown_params(name, params, {"radius", "speed", "angle", "e", "x0", "y0"});
    return model_disk_billiard(param_or(params, "radius", 1.0), param_or(params, "speed", 1.0),
                               param_or(params, "angle", 0.3), param_or(params, "e", 1.0),
                               param_or(params, "x0", 0.0), param_or(params, "y0", 0.0));
  }
  if (name == "variable_mass") {
    reject_unknown_params(name, params, {"e", "g", "drag"});
    return model_variable_mass(param_or(params, "e", 0.5), param_or(params, "g", 10.0),
                               param_or(params, "drag", 0.0));
  }
  throw ConfigError("unknown model '" + name + "'; available: bouncing_ball, disk_billiard, "
                    "variable_mass");
}

std::vector<std::string> model_names() {
  return {"bouncing_ball", "disk_billiard", "variable_mass"};
}

std::string model_summary(const std::string& name) {
  if (name == "bouncing_ball") {
    return "bouncing_ball   d=1  ball above a rigid floor under gravity "
           "(u0=1, v0=0, g=10, e=0.5); closed form available";
  }
  if (name == "disk_billiard") {
    return "disk_billiard   d=2  free particle inside a disk "
           "(radius=1, speed=1, angle=0.3, e=1, x0=0, y0=0)";
  }
  if (name == "variable_mass") {
    return "variable_mass   d=2  wall contact with position-dependent mass "
           "diag(1+x^2, 1) (e=0.5, g=10, drag=0)";
  }
  throw ConfigError("unknown model '" + name + "'");
}

void validate_model(const ModelDescriptor& model) {
  const int d = model.dim;
  if (model.initial.u0.size() != d || model.initial.p0.size() != d) {
    throw ConfigError("model '" + model.name + "': initial data dimension mismatch");
  }
  if (!(model.e >= 0.0 && model.e <= 1.0)) {
    throw ConfigError("restitution coefficient must lie in [0, 1], got " +
                      std::to_string(model.e));
  }

  scheme::check_admissible(model.initial, model.constraint, model.metric);

  // Interior witness: u0 itself, else a short march along the inward direction.
  Vec witness = model.initial.u0;
  if (!(model.constraint.phi(witness) > 0.0)) {
    const Vec dir = model.metric.apply_inverse(witness, model.constraint.grad_phi(witness));
    bool found = false;
    for (double s = 1e-3; s <= 1.0; s *= 4.0) {
      if (model.constraint.phi(witness + s * dir) > 0.0) {
        witness += s * dir;
        found = true;
        break;
      }
    }
    if (!found) {
      throw ConfigError("model '" + model.name + "': could not find an interior point of K");
    }
  }

  // SPD metric at a handful of probe points around the start.
  for (int i = -1; i < 2 * d; ++i) {
    Vec probe = model.initial.u0;
    if (i >= 0) probe[i % d] += (i < d ? 0.37 : -0.53);
    model.metric.factor_at(probe);
  }

  // Walk outward from the witness so the boundary gradient gets exercised.
  Vec outward = model.metric.apply_inverse(witness, model.constraint.grad_phi(witness));
  if (outward.norm() < 1e-12) outward = Vec::Unit(d, 0);
  for (double s = 1e-2; s <= 1e3; s *= 2.0) {
    const Vec outside = witness - s * outward;
    if (model.constraint.phi(outside) < 0.0) {
      geometry::project_boundary(model.constraint, model.metric, outside);
      break;
    }
  }

  if (model.force.has_custom_F()) {
    for (int i = 0; i < 3; ++i) {
      Vec v = Vec::Zero(d);
      v[i % d] = 0.5 * (i + 1);
      const double res =
          model.force.consistency_residual(model.metric, model.initial.t0, witness, v);
      if (res > 1e-10) {
        throw ConfigError("model '" + model.name +
                          "': custom F is inconsistent with f (residual " + std::to_string(res) +
                          ")");
      }
    }
  }
}

}  // namespace impactsim::models
