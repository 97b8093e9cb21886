#include "graspsim/contact.hpp"

#include <cmath>

namespace graspsim {

double friction_f0(double y, double eps) {
  if (y < eps) return y * y / eps - y * y * y / (3.0 * eps * eps);
  return y - eps / 3.0;
}

double friction_f1(double y, double eps) {
  if (y < eps) return y * (2.0 - y / eps) / eps;
  return 1.0;
}

double friction_f2(double y, double eps) {
  if (y < eps) return (2.0 - 2.0 * y / eps) / eps;
  return 0.0;
}

std::vector<FrictionDatum> lag_friction(const ContactTopology& topo, std::span<const Vec2> x,
                                        std::span<const ContactPair> pairs, double kappa) {
  std::vector<FrictionDatum> data;
  data.reserve(pairs.size());
  for (const ContactPair& pair : pairs) {
    const double mu = topo.friction(pair.point, pair.edge);
    if (mu <= 0.0) continue;
    const BoundaryEdge& e = topo.edges()[static_cast<std::size_t>(pair.edge)];
    const Vec2& p = x[static_cast<std::size_t>(pair.point)];
    const Vec2& a = x[static_cast<std::size_t>(e.a)];
    const Vec2& b = x[static_cast<std::size_t>(e.b)];
    const PointEdgeDistance pe = point_edge_distance(p, a, b);
    if (!(pe.distance < pair.dhat)) continue;
    FrictionDatum f;
    f.point = pair.point;
    f.edge_a = e.a;
    f.edge_b = e.b;
    f.mu = mu;
    f.beta = pe.t;
    f.lambda = kappa * std::abs(barrier_derivative(pe.distance, pair.dhat));
    if (pe.t > 0.0 && pe.t < 1.0) {
      f.tangent = (b - a).normalized();
    } else {
      const Vec2 n = (p - (pe.t <= 0.0 ? a : b)).normalized();
      f.tangent = Vec2(-n.y(), n.x());
    }
    data.push_back(f);
  }
  return data;
}

EnergyGradHess friction_energy_grad_hess(std::span<const Vec2> x, std::span<const Vec2> prev,
                                         std::span<const FrictionDatum> data, double eps_v, double h,
                                         bool derivatives) {
  EnergyGradHess out;
  if (derivatives) {
    out.gradient = Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(x.size()));
    out.hessian.reserve(data.size() * 36);
  }
  const double eps = eps_v * h;
  for (const FrictionDatum& f : data) {
    if (f.mu == 0.0 || f.lambda == 0.0) continue;
    const int idx[3] = {f.point, f.edge_a, f.edge_b};
    const double w[3] = {1.0, -(1.0 - f.beta), -f.beta};
    Vec2 rel = Vec2::Zero();
    for (int i = 0; i < 3; ++i)
      rel += w[i] * (x[static_cast<std::size_t>(idx[i])] - prev[static_cast<std::size_t>(idx[i])]);
    const double u = f.tangent.dot(rel);
    const double y = std::abs(u);
    const double scale = f.mu * f.lambda;
    out.energy += scale * friction_f0(y, eps);
    if (!derivatives) continue;
    const double du = scale * friction_f1(y, eps) * (u < 0.0 ? -1.0 : 1.0);
    const double d2u = scale * friction_f2(y, eps);
    for (int i = 0; i < 3; ++i) {
      out.gradient.segment<2>(2 * idx[i]) += du * w[i] * f.tangent;
      if (d2u == 0.0) continue;
      for (int j = 0; j < 3; ++j) {
        const Mat2 block = d2u * w[i] * w[j] * (f.tangent * f.tangent.transpose());
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c) out.hessian.emplace_back(2 * idx[i] + r, 2 * idx[j] + c, block(r, c));
      }
    }
  }
  return out;
}

}  // namespace graspsim
