#pragma once
// Point-edge barrier contact, lagged smoothed friction, and continuous
// collision detection for planar meshes.

#include "graspsim/common.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace graspsim {

class Scene;

struct PointEdgeDistance {
  double distance = 0.0;
  double t = 0.0;  // closest point a + t (b - a), t in [0, 1]
};

/// Exact point-segment distance. Throws GeometryError if |a - b| < 1e-12.
PointEdgeDistance point_edge_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// Squared point-segment distance with derivatives w.r.t. (p, a, b).
struct SquaredDistanceDerivs {
  double value = 0.0;
  double t = 0.0;
  Eigen::Matrix<double, 6, 1> gradient;
  Eigen::Matrix<double, 6, 6> hessian;
};
SquaredDistanceDerivs point_edge_squared_distance_derivs(const Vec2& p, const Vec2& a, const Vec2& b);

/// b(d) = -(d - dhat)^2 ln(d / dhat) for d < dhat, else 0. Throws Error for d <= 0.
double barrier(double d, double dhat);
double barrier_derivative(double d, double dhat);
double barrier_second_derivative(double d, double dhat);

/// Symmetric matrix with negative eigenvalues clamped to zero.
template <int N>
Eigen::Matrix<double, N, N> project_psd(const Eigen::Matrix<double, N, N>& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> eig(m);
  Eigen::Matrix<double, N, 1> values = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

struct BoundaryEdge {
  int a = 0, b = 0;  // global vertex indices
  int body = 0;
  int local = 0;  // index into the body's boundary_edges
};

/// Boundary primitives of a scene and the point-edge pair filter.
class ContactTopology {
 public:
  explicit ContactTopology(const Scene& scene);

  const std::vector<int>& points() const { return points_; }
  const std::vector<BoundaryEdge>& edges() const { return edges_; }
  int body_of(int vertex) const { return vertex_body_[static_cast<std::size_t>(vertex)]; }
  bool candidate(int point, int edge) const;
  double friction(int point, int edge) const;
  /// Median boundary edge length at rest; sets the broad-phase cell size.
  double typical_edge_length() const { return typical_edge_; }
  int vertex_count() const { return static_cast<int>(vertex_body_.size()); }

 private:
  std::vector<int> points_;
  std::vector<BoundaryEdge> edges_;
  std::vector<int> vertex_body_;
  std::vector<std::uint8_t> scripted_;
  std::vector<std::uint8_t> excluded_;  // body x body
  std::vector<double> friction_;        // body x body
  int bodies_ = 0;
  double typical_edge_ = 1.0;
};

struct ContactPair {
  int point_body = 0;
  int point = 0;  // global vertex
  int edge_body = 0;
  int edge = 0;  // index into ContactTopology::edges()
  double distance = 0.0;
  double dhat = 0.0;

  auto key() const { return std::array<int, 4>{point_body, point, edge_body, edge}; }
};

/// Uniform-grid broad phase over axis-aligned boxes.
class SpatialGrid {
 public:
  SpatialGrid(double cell, std::span<const Eigen::AlignedBox2d> boxes);
  /// Sorted, unique ids of boxes sharing a cell with `query`.
  void query(const Eigen::AlignedBox2d& query, std::vector<int>& out) const;

 private:
  long long key(long long ix, long long iy) const { return ix * 1000003LL + iy; }
  double cell_;
  int box_count_ = 0;
  std::vector<std::pair<long long, int>> entries_;  // sorted by cell key
  std::vector<int> oversized_;                      // boxes spanning too many cells
};

/// All candidate point-edge pairs with d < dhat, sorted by
/// (point body, point, edge body, edge).
std::vector<ContactPair> active_pairs(const ContactTopology& topo, std::span<const Vec2> x, double dhat);

/// Smallest distance over all candidate pairs within `radius` (infinity if none).
double min_pair_distance(const ContactTopology& topo, std::span<const Vec2> x, double radius);

/// Smallest distance over every candidate pair, by exhaustive batched scan.
double min_candidate_distance(const ContactTopology& topo, std::span<const Vec2> x);

struct EnergyGradHess {
  double energy = 0.0;
  Eigen::VectorXd gradient;                       // 2 * vertex count
  std::vector<Eigen::Triplet<double>> hessian;    // global 2n x 2n, PSD-projected per term
};

/// kappa * sum b(d_k) with gradient and per-pair PSD Hessian. Returns +inf
/// energy (and skips derivatives) if any pair has d <= 0.
EnergyGradHess contact_energy_grad_hess(const ContactTopology& topo, std::span<const Vec2> x,
                                        std::span<const ContactPair> pairs, double kappa, bool derivatives = true);

struct FrictionDatum {
  int point = 0, edge_a = 0, edge_b = 0;  // global vertices
  double lambda = 0.0;                    // lagged normal force (N)
  Vec2 tangent{1.0, 0.0};                 // lagged unit tangent
  double beta = 0.0;                      // lagged closest-point parameter on the edge
  double mu = 0.0;
};

/// Lagged friction data from the pairs active at `x`.
std::vector<FrictionDatum> lag_friction(const ContactTopology& topo, std::span<const Vec2> x,
                                        std::span<const ContactPair> pairs, double kappa);

/// Smoothed friction: f0(y) = y^2/e - y^3/(3 e^2) for y < e = eps_v h, y - e/3 beyond.
double friction_f0(double y, double eps);
double friction_f1(double y, double eps);
double friction_f2(double y, double eps);

EnergyGradHess friction_energy_grad_hess(std::span<const Vec2> x, std::span<const Vec2> prev,
                                         std::span<const FrictionDatum> data, double eps_v, double h,
                                         bool derivatives = true);

/// Earliest t in [0, 1] at which p + t dp touches segment (a + t da, b + t db).
std::optional<double> point_edge_toi(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& dp, const Vec2& da,
                                     const Vec2& db);

/// Largest safe step along `direction`: 0.9 * earliest impact fraction, or 1.
double ccd_max_step(const ContactTopology& topo, std::span<const Vec2> x, std::span<const Vec2> direction);

/// Minimum boundary distance between two bodies (both directions), via the
/// batched distance kernel. Infinity if either body has no boundary.
double body_min_distance(const Scene& scene, std::span<const Vec2> x, int body_a, int body_b);

Eigen::SparseMatrix<double> to_sparse(std::span<const Eigen::Triplet<double>> triplets, int dofs);

}  // namespace graspsim
