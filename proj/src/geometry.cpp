#include "impactsim/geometry.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace impactsim::geometry {

namespace {

std::string format_point(const Vec& u) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < u.size(); ++i) {
    if (i) os << ", ";
    os << u[i];
  }
  os << ")";
  return os.str();
}

}  // namespace

Mat ConstraintSpec::hessian_at(const Vec& u, const GeometryTolerances& tol) const {
  if (hess_phi) return hess_phi(u);
  const int d = static_cast<int>(u.size());
  const double step = tol.fd_step_scale * (1.0 + u.norm());
  Mat H(d, d);
  Vec up = u, um = u;
  for (int i = 0; i < d; ++i) {
    up[i] += step;
    um[i] -= step;
    H.col(i) = (grad_phi(up) - grad_phi(um)) / (2.0 * step);
    up[i] = u[i];
    um[i] = u[i];
  }
  return 0.5 * (H + H.transpose());
}

Mat MetricField::mass_at(const Vec& u) const {
  Mat M = mass(u);
  const double scale = 1.0 + M.cwiseAbs().maxCoeff();
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw MetricError("mass matrix is not symmetric at u = " + format_point(u), u);
  }
  return M;
}

Eigen::LLT<Mat> MetricField::factor_at(const Vec& u) const {
  Eigen::LLT<Mat> llt(mass_at(u));
  if (llt.info() != Eigen::Success) {
    throw MetricError("mass matrix is not positive definite at u = " + format_point(u), u);
  }
  return llt;
}

Vec MetricField::apply_inverse(const Vec& u, const Vec& xi) const {
  return factor_at(u).solve(xi);
}

Mat MetricField::d_mass_at(const Vec& u, int i, const GeometryTolerances& tol) const {
  if (d_mass) return d_mass(u, i);
  const double step = tol.fd_step_scale * (1.0 + u.norm());
  Vec up = u, um = u;
  up[i] += step;
  um[i] -= step;
  return (mass(up) - mass(um)) / (2.0 * step);
}

double tangent_inner(const MetricField& metric, const Vec& u, const Vec& x, const Vec& y) {
  return x.dot(metric.mass_at(u) * y);
}

double tangent_norm(const MetricField& metric, const Vec& u, const Vec& x) {
  return std::sqrt(std::max(0.0, tangent_inner(metric, u, x, x)));
}

double cotangent_inner(const MetricField& metric, const Vec& u, const Vec& xi, const Vec& eta) {
  return xi.dot(metric.factor_at(u).solve(eta));
}

double cotangent_norm(const MetricField& metric, const Vec& u, const Vec& xi) {
  return std::sqrt(std::max(0.0, cotangent_inner(metric, u, xi, xi)));
}

double kinetic_energy(const MetricField& metric, const Vec& u, const Vec& p) {
  return 0.5 * cotangent_inner(metric, u, p, p);
}

BoundaryPoint inward_normal(const ConstraintSpec& cs, const MetricField& metric, const Vec& x,
                            const GeometryTolerances& tol) {
  const double phi_x = cs.phi(x);
  if (std::abs(phi_x) > tol.phi_tol) {
    throw ConfigError("inward_normal: point is not on the boundary, phi = " +
                      std::to_string(phi_x));
  }
  const Vec g = cs.grad_phi(x);
  const double gnorm = cotangent_norm(metric, x, g);
  if (!(gnorm > 1e-14)) {
    throw DegenerateBoundaryError("constraint gradient vanishes at boundary point " +
                                  format_point(x));
  }
  return BoundaryPoint{x, metric.apply_inverse(x, g) / gnorm};
}

namespace {

// Newton on the stationarity system of min (y-x)^T M(x) (y-x) s.t. phi(y)=0:
//   2 M(x)(y - x) - lambda dphi(y) = 0,   phi(y) = 0.
BoundaryPoint project_boundary_frozen(const ConstraintSpec& cs, const MetricField& metric,
                                      const Vec& x, const GeometryTolerances& tol) {
  const int d = static_cast<int>(x.size());
  const Mat M = metric.mass_at(x);
  Eigen::LLT<Mat> llt(M);
  if (llt.info() != Eigen::Success) {
    throw MetricError("mass matrix is not positive definite at u = " + format_point(x), x);
  }

  Vec g = cs.grad_phi(x);
  Vec Minv_g = llt.solve(g);
  const double c = g.dot(Minv_g);
  if (!(c > 1e-28)) {
    throw DegenerateBoundaryError("constraint gradient vanishes near " + format_point(x));
  }
  // First-order step onto the boundary seeds the Newton iteration.
  Vec y = x - (cs.phi(x) / c) * Minv_g;
  double lambda = -2.0 * cs.phi(x) / c;

  Vec residual(d + 1);
  Mat J(d + 1, d + 1);
  double res_norm = 0.0;
  for (int it = 0; it < tol.max_newton; ++it) {
    g = cs.grad_phi(y);
    residual.head(d) = 2.0 * M * (y - x) - lambda * g;
    residual[d] = cs.phi(y);
    res_norm = residual.norm();
    if (res_norm <= tol.newton_tol * (1.0 + x.norm()) && std::abs(residual[d]) <= tol.phi_tol) {
      return BoundaryPoint{y, inward_normal(cs, metric, y, tol).inward_normal};
    }
    J.topLeftCorner(d, d) = 2.0 * M - lambda * cs.hessian_at(y, tol);
    J.topRightCorner(d, 1) = -g;
    J.bottomLeftCorner(1, d) = g.transpose();
    J(d, d) = 0.0;
    Vec delta = J.partialPivLu().solve(-residual);
    if (!delta.allFinite()) break;
    y += delta.head(d);
    lambda += delta[d];
  }
  throw ProjectionError("boundary projection Newton did not converge near " + format_point(x) +
                            " (residual " + std::to_string(res_norm) + ")",
                        y, res_norm);
}

// Shooting mode: find z on the boundary and a signed length s such that the
// geodesic from z with initial velocity -N(z) reaches x after parameter s.
BoundaryPoint project_boundary_geodesic(const ConstraintSpec& cs, const MetricField& metric,
                                        const Vec& x, const GeometryTolerances& tol) {
  const int d = static_cast<int>(x.size());
  BoundaryPoint frozen = project_boundary_frozen(cs, metric, x, tol);
  Vec z = frozen.position;
  double s = tangent_norm(metric, x, frozen.position - x);
  if (cs.phi(x) > 0.0) s = -s;  // interior points lie on the +N side

  auto shoot = [&](const Vec& z_it, double s_it) -> Vec {
    const Vec n = inward_normal(cs, metric, z_it, tol).inward_normal;
    return geodesic_point(metric, z_it, -n, s_it, tol);
  };

  Vec residual(d + 1);
  Mat J(d + 1, d + 1);
  // Shooting residuals are only as smooth as the FD Jacobian; accept a
  // slightly looser tolerance than the frozen-metric Newton.
  const double shoot_tol = std::max(tol.newton_tol, 1e-11) * (1.0 + x.norm());
  double res_norm = 0.0;
  for (int it = 0; it < tol.max_newton; ++it) {
    residual.head(d) = shoot(z, s) - x;
    residual[d] = cs.phi(z);
    res_norm = residual.norm();
    if (res_norm <= shoot_tol) {
      return BoundaryPoint{z, inward_normal(cs, metric, z, tol).inward_normal};
    }
    const double fd = tol.fd_step_scale * (1.0 + z.norm());
    for (int j = 0; j < d; ++j) {
      Vec zp = z, zm = z;
      zp[j] += fd;
      zm[j] -= fd;
      J.block(0, j, d, 1) = (shoot(zp, s) - shoot(zm, s)) / (2.0 * fd);
      J(d, j) = (cs.phi(zp) - cs.phi(zm)) / (2.0 * fd);
    }
    J.block(0, d, d, 1) = (shoot(z, s + fd) - shoot(z, s - fd)) / (2.0 * fd);
    J(d, d) = 0.0;
    Vec delta = J.partialPivLu().solve(-residual);
    if (!delta.allFinite()) break;
    z += delta.head(d);
    s += delta[d];
  }
  throw ProjectionError("geodesic projection shooting did not converge near " + format_point(x) +
                            " (residual " + std::to_string(res_norm) + ")",
                        z, res_norm);
}

}  // namespace

BoundaryPoint project_boundary(const ConstraintSpec& cs, const MetricField& metric, const Vec& x,
                               ProjectionMode mode, const GeometryTolerances& tol) {
  return mode == ProjectionMode::FrozenMetric ? project_boundary_frozen(cs, metric, x, tol)
                                              : project_boundary_geodesic(cs, metric, x, tol);
}

Vec project_K(const ConstraintSpec& cs, const MetricField& metric, const Vec& x,
              ProjectionMode mode, const GeometryTolerances& tol) {
  if (cs.phi(x) >= 0.0) return x;
  return project_boundary(cs, metric, x, mode, tol).position;
}

ImpulseSplit decompose_impulse(const ConstraintSpec& cs, const MetricField& metric, const Vec& x,
                               const Vec& p, const GeometryTolerances& tol) {
  if (std::abs(cs.phi(x)) > tol.phi_tol) {
    throw ConfigError("decompose_impulse: point is not on the boundary, phi = " +
                      std::to_string(cs.phi(x)));
  }
  const Vec g = cs.grad_phi(x);
  const Eigen::LLT<Mat> llt = metric.factor_at(x);
  const Vec Minv_g = llt.solve(g);
  const double gg = g.dot(Minv_g);
  if (!(gg > 1e-28)) {
    throw DegenerateBoundaryError("constraint gradient vanishes at boundary point " +
                                  format_point(x));
  }
  ImpulseSplit split;
  split.normal = (p.dot(Minv_g) / gg) * g;
  split.tangential = p - split.normal;
  return split;
}

ImpactOutcome impact_map(const ConstraintSpec& cs, const MetricField& metric, const Vec& x,
                         const Vec& p_minus, double e, const GeometryTolerances& /*tol*/) {
  if (!(e >= 0.0 && e <= 1.0)) {
    throw ConfigError("restitution coefficient must lie in [0, 1], got " + std::to_string(e));
  }
  const Vec g = cs.grad_phi(x);
  const Eigen::LLT<Mat> llt = metric.factor_at(x);
  const Vec Minv_g = llt.solve(g);
  const double gg = g.dot(Minv_g);
  if (!(gg > 1e-28)) {
    throw DegenerateBoundaryError("constraint gradient vanishes at boundary point " +
                                  format_point(x));
  }
  const double gp = p_minus.dot(Minv_g);  // <dphi(x), p->*_x
  if (gp > 0.0) return ImpactOutcome{p_minus, false};
  return ImpactOutcome{p_minus - (1.0 + e) * (gp / gg) * g, true};
}

Vec geodesic_acceleration(const MetricField& metric, const Vec& u, const Vec& w,
                          const GeometryTolerances& tol) {
  const int d = static_cast<int>(u.size());
  Vec b = Vec::Zero(d);
  std::vector<Mat> dM(d);
  for (int i = 0; i < d; ++i) dM[i] = metric.d_mass_at(u, i, tol);
  for (int l = 0; l < d; ++l) {
    double term1 = 0.0;
    for (int i = 0; i < d; ++i) term1 += w[i] * dM[i].row(l).dot(w);
    b[l] = term1 - 0.5 * w.dot(dM[l] * w);
  }
  return -metric.factor_at(u).solve(b);
}

Vec geodesic_point(const MetricField& metric, const Vec& z, const Vec& w0, double s,
                   const GeometryTolerances& tol) {
  const int n = std::max(1, tol.geodesic_substeps);
  const double ds = s / n;
  Vec u = z, w = w0;
  for (int k = 0; k < n; ++k) {
    const Vec k1u = w;
    const Vec k1w = geodesic_acceleration(metric, u, w, tol);
    const Vec k2u = w + 0.5 * ds * k1w;
    const Vec k2w = geodesic_acceleration(metric, u + 0.5 * ds * k1u, k2u, tol);
    const Vec k3u = w + 0.5 * ds * k2w;
    const Vec k3w = geodesic_acceleration(metric, u + 0.5 * ds * k2u, k3u, tol);
    const Vec k4u = w + ds * k3w;
    const Vec k4w = geodesic_acceleration(metric, u + ds * k3u, k4u, tol);
    u += (ds / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    w += (ds / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
  }
  return u;
}

}  // namespace impactsim::geometry
