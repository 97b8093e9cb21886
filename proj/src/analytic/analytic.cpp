#include "graspsim/analytic.hpp"
#include "graspsim/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace graspsim {

void ContactModelInput::validate() const {
  for (const auto& n : normals)
    if (std::abs(n.norm() - 1.0) > 1e-9) throw InputError("contact normals must be unit length");
  if (!(mu >= 0.0)) throw InputError("friction coefficient must be >= 0");
  if (!(max_normal_force > 0.0)) throw InputError("max normal force must be positive");
  if (!(torsion_ratio >= 0.0)) throw InputError("torsion ratio must be >= 0");
  if (!(mass > 0.0)) throw InputError("object mass must be positive");
}

std::optional<ContactModelInput> find_contacts(std::span<const Vec2> polygon, const GraspSpec& grasp) {
  const Vec2 a = grasp.axis();
  const Vec2& c = grasp.center;
  const double reach = 0.5 * grasp.max_width;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  auto hit = [&](double s) {
    if (s < -reach || s > reach) return;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  };
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Vec2& p = polygon[i];
    const Vec2& q = polygon[(i + 1) % polygon.size()];
    const Vec2 e = q - p;
    const double den = cross2(a, e);
    const Vec2 w = p - c;
    if (std::abs(den) <= 1e-15 * e.norm()) {
      if (std::abs(cross2(a, w)) <= 1e-12 * std::max(1.0, w.norm())) {
        for (const Vec2& v : {p, q}) hit(a.dot(v - c));
      }
      continue;
    }
    // c + s a = p + t e
    const double t = cross2(c - p, a) / cross2(e, a);
    if (t < 0.0 || t > 1.0) continue;
    hit(cross2(e, c - p) / den);
  }
  if (!(lo <= hi)) return std::nullopt;
  ContactModelInput in;
  in.points = {c + lo * a, c + hi * a};
  in.normals = {a, -a};
  return in;
}

bool lp_feasible(const Eigen::MatrixXd& A_eq, const Eigen::VectorXd& b_eq, const Eigen::MatrixXd& A_ub,
                 const Eigen::VectorXd& b_ub, double tolerance) {
  const Eigen::Index n = std::max(A_eq.cols(), A_ub.cols());
  const Eigen::Index me = A_eq.rows(), mu = A_ub.rows();
  const Eigen::Index m = me + mu;
  const Eigen::Index cols = n + mu + m;  // x, slacks, artificials
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, cols + 1);
  if (me) T.block(0, 0, me, A_eq.cols()) = A_eq;
  if (mu) {
    T.block(me, 0, mu, A_ub.cols()) = A_ub;
    T.block(me, n, mu, mu).setIdentity();
  }
  T.block(0, cols, me, 1) = b_eq;
  T.block(me, cols, mu, 1) = b_ub;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (T(i, cols) < 0.0) T.row(i) *= -1.0;
    T(i, n + mu + i) = 1.0;
  }
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + mu + i;

  const double eps = 1e-12;
  const Eigen::Index artificial = n + mu;
  for (int iter = 0; iter < 10000; ++iter) {
    // Reduced costs of the phase-one objective (sum of artificials).
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < artificial; ++j) {
      double r = 0.0;
      for (Eigen::Index i = 0; i < m; ++i)
        if (basis[static_cast<std::size_t>(i)] >= artificial) r -= T(i, j);
      bool basic = false;
      for (const auto b : basis) basic = basic || b == j;
      if (!basic && r < -eps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (T(i, enter) <= eps) continue;
      const double ratio = T(i, cols) / T(i, enter);
      if (ratio < best - 1e-15 ||
          (ratio <= best + 1e-15 && leave >= 0 && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave < 0) break;
    T.row(leave) /= T(leave, enter);
    for (Eigen::Index i = 0; i < m; ++i)
      if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
    basis[static_cast<std::size_t>(leave)] = enter;
  }
  double infeasibility = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    if (basis[static_cast<std::size_t>(i)] >= artificial) infeasibility += std::max(0.0, T(i, cols));
  const double scale = 1.0 + std::max(b_eq.size() ? b_eq.cwiseAbs().maxCoeff() : 0.0,
                                      b_ub.size() ? b_ub.cwiseAbs().maxCoeff() : 0.0);
  return infeasibility <= tolerance * scale;
}

bool wrench_resistance(const ContactModelInput& in) {
  in.validate();
  const double F = in.max_normal_force;
  double L = in.torsion_ratio;
  for (const auto& p : in.points) L = std::max(L, (p - in.center_of_mass).norm());
  L = std::max(L, 1e-9);

  // Per contact: fn, ft+, ft-, g+, g-   (forces / F, torques / (F L)).
  Eigen::MatrixXd A_eq = Eigen::MatrixXd::Zero(3, 10);
  Eigen::VectorXd b_eq(3);
  b_eq << 0.0, in.mass * in.gravity / F, 0.0;
  Eigen::MatrixXd A_ub = Eigen::MatrixXd::Zero(10, 10);
  Eigen::VectorXd b_ub = Eigen::VectorXd::Zero(10);
  for (int i = 0; i < 2; ++i) {
    const Vec2 n = in.normals[static_cast<std::size_t>(i)];
    const Vec2 t(-n.y(), n.x());
    const Vec2 r = (in.points[static_cast<std::size_t>(i)] - in.center_of_mass) / L;
    const int k = 5 * i;
    A_eq.block<2, 1>(0, k) = n;
    A_eq.block<2, 1>(0, k + 1) = t;
    A_eq.block<2, 1>(0, k + 2) = -t;
    A_eq(2, k) = cross2(r, n);
    A_eq(2, k + 1) = cross2(r, t);
    A_eq(2, k + 2) = -cross2(r, t);
    A_eq(2, k + 3) = 1.0;
    A_eq(2, k + 4) = -1.0;

    const int row = 5 * i;
    A_ub(row, k) = 1.0;
    b_ub(row) = 1.0;
    A_ub(row + 1, k + 1) = 1.0;
    A_ub(row + 1, k + 2) = -1.0;
    A_ub(row + 1, k) = -in.mu;
    A_ub(row + 2, k + 1) = -1.0;
    A_ub(row + 2, k + 2) = 1.0;
    A_ub(row + 2, k) = -in.mu;
    A_ub(row + 3, k + 3) = 1.0;
    A_ub(row + 3, k + 4) = -1.0;
    A_ub(row + 3, k) = -in.torsion_ratio / L;
    A_ub(row + 4, k + 3) = -1.0;
    A_ub(row + 4, k + 4) = 1.0;
    A_ub(row + 4, k) = -in.torsion_ratio / L;
  }
  return lp_feasible(A_eq, b_eq, A_ub, b_ub, 1e-9);
}

std::vector<Vec2> placed_object_polygon(const ScenarioConfig& config) {
  ScenarioConfig flat = config;
  flat.object.subdivision = 0;
  return build_object_body(flat).mesh.vertices;
}

AnalyticPrediction predict_analytic(const ScenarioConfig& config, const GraspSpec& grasp) {
  const std::vector<Vec2> poly = placed_object_polygon(config);
  auto contacts = find_contacts(poly, grasp);
  if (!contacts) return {false, true};
  double area = 0.0;
  Vec2 centroid = Vec2::Zero();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    area += 0.5 * cross2(a, b);
    centroid += (a + b) * cross2(a, b);
  }
  centroid /= 6.0 * area;
  ContactModelInput& in = *contacts;
  in.mu = config.jaw.pad_material.friction_coeff;
  in.max_normal_force = config.analytic.max_normal_force;
  in.torsion_ratio = config.analytic.torsion_ratio;
  in.mass = config.object.material.density * area;
  in.center_of_mass = centroid;
  in.gravity = config.physics.gravity.norm();
  return {wrench_resistance(in), false};
}

}  // namespace graspsim
