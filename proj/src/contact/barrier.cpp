#include "graspsim/contact.hpp"

#include <cmath>
#include <limits>

namespace graspsim {

namespace {

struct Closest {
  double dist2;
  double t;
};

// Same operation order as the batched kernels.
Closest closest_point(const Vec2& p, const Vec2& a, const Vec2& b) {
  const double ex = b.x() - a.x(), ey = b.y() - a.y();
  const double qx = p.x() - a.x(), qy = p.y() - a.y();
  const double ee = ex * ex + ey * ey;
  const double qe = qx * ex + qy * ey;
  double s = qe / ee;
  s = s > 0.0 ? s : 0.0;
  s = s < 1.0 ? s : 1.0;
  const double rx = qx - s * ex, ry = qy - s * ey;
  return {rx * rx + ry * ry, s};
}

}  // namespace

PointEdgeDistance point_edge_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  if ((b - a).norm() < 1e-12) throw GeometryError("degenerate edge: endpoints closer than 1e-12 m");
  const Closest c = closest_point(p, a, b);
  return {std::sqrt(c.dist2), c.t};
}

SquaredDistanceDerivs point_edge_squared_distance_derivs(const Vec2& p, const Vec2& a, const Vec2& b) {
  if ((b - a).norm() < 1e-12) throw GeometryError("degenerate edge: endpoints closer than 1e-12 m");
  const Closest cp = closest_point(p, a, b);
  SquaredDistanceDerivs out;
  out.value = cp.dist2;
  out.t = cp.t;
  out.gradient.setZero();
  out.hessian.setZero();

  if (cp.t <= 0.0 || cp.t >= 1.0) {
    const int k = cp.t <= 0.0 ? 2 : 4;
    const Vec2 d = p - (cp.t <= 0.0 ? a : b);
    out.gradient.segment<2>(0) = 2.0 * d;
    out.gradient.segment<2>(k) = -2.0 * d;
    const Mat2 I2 = 2.0 * Mat2::Identity();
    out.hessian.block<2, 2>(0, 0) = I2;
    out.hessian.block<2, 2>(k, k) = I2;
    out.hessian.block<2, 2>(0, k) = -I2;
    out.hessian.block<2, 2>(k, 0) = -I2;
    return out;
  }

  // Interior: D = c^2 / L with c = cross(b - a, p - a), L = |b - a|^2.
  const double ex = b.x() - a.x(), ey = b.y() - a.y();
  const double qx = p.x() - a.x(), qy = p.y() - a.y();
  const double c = ex * qy - ey * qx;
  const double L = ex * ex + ey * ey;

  Eigen::Matrix<double, 6, 1> gc, gL;
  gc << -ey, ex, ey - qy, qx - ex, qy, -qx;
  gL << 0.0, 0.0, -2.0 * ex, -2.0 * ey, 2.0 * ex, 2.0 * ey;

  Eigen::Matrix<double, 6, 6> hc = Eigen::Matrix<double, 6, 6>::Zero();
  auto sym = [](Eigen::Matrix<double, 6, 6>& m, int i, int j, double v) {
    m(i, j) = v;
    m(j, i) = v;
  };
  // variables: px py ax ay bx by
  sym(hc, 4, 1, 1.0);
  sym(hc, 4, 3, -1.0);
  sym(hc, 2, 1, -1.0);
  sym(hc, 5, 0, -1.0);
  sym(hc, 5, 2, 1.0);
  sym(hc, 3, 0, 1.0);

  Eigen::Matrix<double, 6, 6> hL = Eigen::Matrix<double, 6, 6>::Zero();
  for (int d = 0; d < 2; ++d) {
    hL(2 + d, 2 + d) = 2.0;
    hL(4 + d, 4 + d) = 2.0;
    sym(hL, 2 + d, 4 + d, -2.0);
  }

  const double L2 = L * L;
  out.gradient = 2.0 * c / L * gc - c * c / L2 * gL;
  const Eigen::Matrix<double, 6, 6> cross_terms = gc * gL.transpose() + gL * gc.transpose();
  out.hessian = 2.0 / L * (gc * gc.transpose()) + 2.0 * c / L * hc - 2.0 * c / L2 * cross_terms -
                c * c / L2 * hL + 2.0 * c * c / (L2 * L) * (gL * gL.transpose());
  return out;
}

double barrier(double d, double dhat) {
  if (!(d > 0.0)) throw Error("barrier evaluated at non-positive distance");
  if (d >= dhat) return 0.0;
  const double r = d - dhat;
  return -r * r * std::log(d / dhat);
}

double barrier_derivative(double d, double dhat) {
  if (!(d > 0.0)) throw Error("barrier evaluated at non-positive distance");
  if (d >= dhat) return 0.0;
  const double r = d - dhat;
  return -2.0 * r * std::log(d / dhat) - r * r / d;
}

double barrier_second_derivative(double d, double dhat) {
  if (!(d > 0.0)) throw Error("barrier evaluated at non-positive distance");
  if (d >= dhat) return 0.0;
  const double r = d - dhat;
  return -2.0 * std::log(d / dhat) - 4.0 * r / d + r * r / (d * d);
}

EnergyGradHess contact_energy_grad_hess(const ContactTopology& topo, std::span<const Vec2> x,
                                        std::span<const ContactPair> pairs, double kappa, bool derivatives) {
  EnergyGradHess out;
  if (derivatives) out.gradient = Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(x.size()));
  if (derivatives) out.hessian.reserve(pairs.size() * 36);
  for (const ContactPair& pair : pairs) {
    const BoundaryEdge& e = topo.edges()[static_cast<std::size_t>(pair.edge)];
    const int idx[3] = {pair.point, e.a, e.b};
    const Vec2& p = x[static_cast<std::size_t>(idx[0])];
    const Vec2& a = x[static_cast<std::size_t>(idx[1])];
    const Vec2& b = x[static_cast<std::size_t>(idx[2])];
    const double dhat = pair.dhat;
    if (!derivatives) {
      const double d = point_edge_distance(p, a, b).distance;
      if (!(d > 0.0)) {
        out.energy = std::numeric_limits<double>::infinity();
        return out;
      }
      out.energy += kappa * barrier(d, dhat);
      continue;
    }
    const SquaredDistanceDerivs D = point_edge_squared_distance_derivs(p, a, b);
    if (!(D.value > 0.0)) {
      out.energy = std::numeric_limits<double>::infinity();
      out.gradient.setZero();
      out.hessian.clear();
      return out;
    }
    if (D.value >= dhat * dhat) continue;
    const double d = std::sqrt(D.value);
    const double b1 = barrier_derivative(d, dhat);
    const double b2 = barrier_second_derivative(d, dhat);
    const double g1 = b1 / (2.0 * d);
    const double g2 = (b2 * d - b1) / (4.0 * d * d * d);
    out.energy += kappa * barrier(d, dhat);
    const Eigen::Matrix<double, 6, 1> g = kappa * g1 * D.gradient;
    const Eigen::Matrix<double, 6, 6> H =
        project_psd<6>(kappa * (g2 * (D.gradient * D.gradient.transpose()) + g1 * D.hessian));
    for (int i = 0; i < 3; ++i) {
      out.gradient.segment<2>(2 * idx[i]) += g.segment<2>(2 * i);
      for (int j = 0; j < 3; ++j)
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c) out.hessian.emplace_back(2 * idx[i] + r, 2 * idx[j] + c, H(2 * i + r, 2 * j + c));
    }
  }
  return out;
}

Eigen::SparseMatrix<double> to_sparse(std::span<const Eigen::Triplet<double>> triplets, int dofs) {
  Eigen::SparseMatrix<double> m(dofs, dofs);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

}  // namespace graspsim
