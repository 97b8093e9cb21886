#include "graspsim/elastic.hpp"
#include "graspsim/contact.hpp"
#include "graspsim/scene.hpp"
#include "graspsim/simd/kernels.hpp"

#include <cmath>
#include <limits>

namespace graspsim {

LameParameters lame_parameters(const Material& m) {
  const double E = m.youngs_modulus, nu = m.poisson_ratio;
  return {E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), E / (2.0 * (1.0 + nu))};
}

ElementPrecomp precompute_element(const std::array<Vec2, 3>& rest, const std::array<int, 3>& vertices,
                                  const Material& material) {
  Mat2 Dm;
  Dm.col(0) = rest[1] - rest[0];
  Dm.col(1) = rest[2] - rest[0];
  const double det = Dm.determinant();
  if (!(det > 0.0)) throw GeometryError("element with non-positive rest area");
  ElementPrecomp e;
  e.vertices = vertices;
  e.rest_inverse = Dm.inverse();
  e.rest_area = 0.5 * det;
  const auto lame = lame_parameters(material);
  e.lambda = lame.lambda;
  e.mu = lame.mu;
  return e;
}

Mat2 deformation_gradient(const ElementPrecomp& element, const std::array<Vec2, 3>& x) {
  Mat2 Ds;
  Ds.col(0) = x[1] - x[0];
  Ds.col(1) = x[2] - x[0];
  return Ds * element.rest_inverse;
}

namespace {

double density_from_invariants(double trace_ftf, double J, double mu, double lambda) {
  if (!(J > 0.0)) return std::numeric_limits<double>::infinity();
  const double lnJ = std::log(J);
  return 0.5 * mu * (trace_ftf - 2.0) - mu * lnJ + 0.5 * lambda * lnJ * lnJ;
}

std::array<Vec2, 3> gather(std::span<const Vec2> x, const std::array<int, 3>& v) {
  return {x[static_cast<std::size_t>(v[0])], x[static_cast<std::size_t>(v[1])], x[static_cast<std::size_t>(v[2])]};
}

}  // namespace

double neo_hookean_density(const Mat2& F, double mu, double lambda) {
  return density_from_invariants(F.squaredNorm(), F.determinant(), mu, lambda);
}

Mat2 neo_hookean_stress(const Mat2& F, double mu, double lambda) {
  const double J = F.determinant();
  const Mat2 FinvT = F.inverse().transpose();
  return mu * (F - FinvT) + lambda * std::log(J) * FinvT;
}

ElasticBody::ElasticBody(const Body& body) {
  const auto& mesh = body.mesh;
  vertex_count_ = static_cast<int>(mesh.vertices.size());
  elements_.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    elements_.push_back(precompute_element(gather(mesh.rest_positions, t), t, body.material));
    const auto& e = elements_.back();
    rest_area_ += e.rest_area;
    v0_.push_back(t[0]);
    v1_.push_back(t[1]);
    v2_.push_back(t[2]);
    dm00_.push_back(e.rest_inverse(0, 0));
    dm01_.push_back(e.rest_inverse(0, 1));
    dm10_.push_back(e.rest_inverse(1, 0));
    dm11_.push_back(e.rest_inverse(1, 1));
  }
}

double ElasticBody::energy(std::span<const Vec2> x) const {
  const std::size_t n = elements_.size();
  std::vector<double> tr(n), det(n);
  const simd::TriangleBatch batch{v0_, v1_, v2_, dm00_, dm01_, dm10_, dm11_};
  simd::kernels().invariants(x.front().data(), batch, tr.data(), det.data());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = elements_[i];
    const double w = density_from_invariants(tr[i], det[i], e.mu, e.lambda);
    if (w == std::numeric_limits<double>::infinity()) return w;
    total += e.rest_area * w;
  }
  return total;
}

double ElasticBody::min_det(std::span<const Vec2> x) const {
  const std::size_t n = elements_.size();
  std::vector<double> tr(n), det(n);
  const simd::TriangleBatch batch{v0_, v1_, v2_, dm00_, dm01_, dm10_, dm11_};
  simd::kernels().invariants(x.front().data(), batch, tr.data(), det.data());
  double m = std::numeric_limits<double>::infinity();
  for (const double d : det) m = std::min(m, d);
  return m;
}

void ElasticBody::add_gradient(std::span<const Vec2> x, Eigen::Ref<Eigen::VectorXd> g, int offset) const {
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const auto& e = elements_[i];
    const Mat2 F = deformation_gradient(e, gather(x, e.vertices));
    if (!(F.determinant() > 0.0)) throw GeometryError("inverted element " + std::to_string(i));
    const Mat2 G = e.rest_area * neo_hookean_stress(F, e.mu, e.lambda) * e.rest_inverse.transpose();
    g.segment<2>(2 * (offset + e.vertices[1])) += G.col(0);
    g.segment<2>(2 * (offset + e.vertices[2])) += G.col(1);
    g.segment<2>(2 * (offset + e.vertices[0])) -= G.col(0) + G.col(1);
  }
}

Eigen::Matrix<double, 6, 6> ElasticBody::element_hessian(const ElementPrecomp& e, std::span<const Vec2> x) const {
  const Mat2 F = deformation_gradient(e, gather(x, e.vertices));
  const double J = F.determinant();
  if (!(J > 0.0)) throw GeometryError("inverted element");
  const Mat2 FinvT = F.inverse().transpose();
  const double lnJ = std::log(J);
  std::array<Mat2, 6> dF, dP;
  for (int k = 0; k < 6; ++k) {
    Mat2 dDs = Mat2::Zero();
    const int vertex = k / 2, dim = k % 2;
    if (vertex == 0) {
      dDs(dim, 0) = -1.0;
      dDs(dim, 1) = -1.0;
    } else {
      dDs(dim, vertex - 1) = 1.0;
    }
    dF[static_cast<std::size_t>(k)] = dDs * e.rest_inverse;
    const Mat2& d = dF[static_cast<std::size_t>(k)];
    dP[static_cast<std::size_t>(k)] = e.mu * d + (e.mu - e.lambda * lnJ) * FinvT * d.transpose() * FinvT +
                                      e.lambda * (FinvT.cwiseProduct(d).sum()) * FinvT;
  }
  Eigen::Matrix<double, 6, 6> H;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      H(i, j) = e.rest_area * dP[static_cast<std::size_t>(j)].cwiseProduct(dF[static_cast<std::size_t>(i)]).sum();
  return 0.5 * (H + H.transpose());
}

void ElasticBody::add_hessian(std::span<const Vec2> x, std::vector<Eigen::Triplet<double>>& out, int offset,
                              bool project) const {
  out.reserve(out.size() + elements_.size() * 36);
  for (const auto& e : elements_) {
    Eigen::Matrix<double, 6, 6> H = element_hessian(e, x);
    if (project) H = project_psd<6>(H);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c)
            out.emplace_back(2 * (offset + e.vertices[static_cast<std::size_t>(i)]) + r,
                             2 * (offset + e.vertices[static_cast<std::size_t>(j)]) + c, H(2 * i + r, 2 * j + c));
  }
}

double body_strain_energy(const Body& body, std::span<const Vec2> positions) {
  return ElasticBody(body).energy(positions);
}

Eigen::VectorXd elastic_gradient(const Body& body, std::span<const Vec2> positions) {
  const ElasticBody eb(body);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * eb.vertex_count());
  eb.add_gradient(positions, g);
  return g;
}

namespace {
Eigen::SparseMatrix<double> assemble(const Body& body, std::span<const Vec2> positions, bool project) {
  const ElasticBody eb(body);
  std::vector<Eigen::Triplet<double>> t;
  eb.add_hessian(positions, t, 0, project);
  return to_sparse(t, 2 * eb.vertex_count());
}
}  // namespace

Eigen::SparseMatrix<double> elastic_hessian_spd(const Body& body, std::span<const Vec2> positions) {
  return assemble(body, positions, true);
}

Eigen::SparseMatrix<double> elastic_hessian(const Body& body, std::span<const Vec2> positions) {
  return assemble(body, positions, false);
}

}  // namespace graspsim
