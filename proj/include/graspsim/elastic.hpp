#pragma once
// Compressible Neo-Hookean triangle elements:
//   W(F) = mu/2 (tr F^T F - 2) - mu ln J + lambda/2 (ln J)^2,  J = det F.

#include "graspsim/common.hpp"
#include "graspsim/config.hpp"

#include <Eigen/Sparse>

#include <array>
#include <span>
#include <vector>

namespace graspsim {

struct Body;

struct LameParameters {
  double lambda = 0.0;
  double mu = 0.0;
};
LameParameters lame_parameters(const Material& material);

struct ElementPrecomp {
  std::array<int, 3> vertices{};
  Mat2 rest_inverse = Mat2::Identity();  // D_m^-1
  double rest_area = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
};

/// Throws GeometryError for rest triangles with non-positive area.
ElementPrecomp precompute_element(const std::array<Vec2, 3>& rest, const std::array<int, 3>& vertices,
                                  const Material& material);

Mat2 deformation_gradient(const ElementPrecomp& element, const std::array<Vec2, 3>& positions);

/// Energy density; +infinity when det F <= 0.
double neo_hookean_density(const Mat2& F, double mu, double lambda);
/// First Piola-Kirchhoff stress dW/dF. Requires det F > 0.
Mat2 neo_hookean_stress(const Mat2& F, double mu, double lambda);

/// Per-body element cache. Positions passed to members are the body's own
/// vertices in local order.
class ElasticBody {
 public:
  explicit ElasticBody(const Body& body);

  const std::vector<ElementPrecomp>& elements() const { return elements_; }
  int vertex_count() const { return vertex_count_; }
  double rest_area() const { return rest_area_; }

  /// Total strain energy (J per metre of depth), +infinity if any J <= 0.
  double energy(std::span<const Vec2> x) const;
  /// Smallest det F over the body's elements.
  double min_det(std::span<const Vec2> x) const;
  /// Accumulates the gradient into g (2 * vertex_count entries starting at 2 * offset).
  /// Throws GeometryError naming the first inverted element.
  void add_gradient(std::span<const Vec2> x, Eigen::Ref<Eigen::VectorXd> g, int offset = 0) const;
  /// Appends Hessian triplets with global row/column = 2 * (offset + local) + d.
  void add_hessian(std::span<const Vec2> x, std::vector<Eigen::Triplet<double>>& out, int offset = 0,
                   bool project = true) const;

  Eigen::Matrix<double, 6, 6> element_hessian(const ElementPrecomp& e, std::span<const Vec2> x) const;

 private:
  std::vector<ElementPrecomp> elements_;
  std::vector<std::int32_t> v0_, v1_, v2_;
  std::vector<double> dm00_, dm01_, dm10_, dm11_;
  int vertex_count_ = 0;
  double rest_area_ = 0.0;
};

double body_strain_energy(const Body& body, std::span<const Vec2> positions);
Eigen::VectorXd elastic_gradient(const Body& body, std::span<const Vec2> positions);
Eigen::SparseMatrix<double> elastic_hessian_spd(const Body& body, std::span<const Vec2> positions);
Eigen::SparseMatrix<double> elastic_hessian(const Body& body, std::span<const Vec2> positions);

}  // namespace graspsim
