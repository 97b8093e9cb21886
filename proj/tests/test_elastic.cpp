#include "graspsim/elastic.hpp"
#include "graspsim/scene.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>

using namespace graspsim;

namespace {

Body square_body(int level, double E = 1e8) {
  Body b;
  b.kind = BodyKind::DeformablePad;
  b.mesh = triangulate(std::vector<Vec2>{{0, 0}, {0.02, 0}, {0.02, 0.01}, {0, 0.01}}, level);
  b.mesh.rest_positions = b.mesh.vertices;
  b.material = Material{E, 0.4, 1100.0, 0.4};
  b.scripted.assign(b.mesh.vertices.size(), 0);
  return b;
}

Positions perturbed(const Body& b, std::mt19937_64& rng, double amplitude) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  Positions x = b.mesh.rest_positions;
  for (auto& p : x) p += Vec2(u(rng), u(rng));
  return x;
}

Positions rigid(const Positions& x, double angle, const Vec2& shift) {
  const Eigen::Rotation2Dd r(angle);
  Positions out;
  for (const auto& p : x) out.push_back(r * p + shift);
  return out;
}

Eigen::VectorXd fd_gradient(const Body& b, const Positions& x, double step) {
  Eigen::VectorXd g(2 * static_cast<Eigen::Index>(x.size()));
  Positions y = x;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int c = 0; c < 2; ++c) {
      y[i][c] = x[i][c] + step;
      const double ep = body_strain_energy(b, y);
      y[i][c] = x[i][c] - step;
      const double em = body_strain_energy(b, y);
      y[i][c] = x[i][c];
      g(2 * static_cast<Eigen::Index>(i) + c) = (ep - em) / (2.0 * step);
    }
  return g;
}

}  // namespace

TEST_CASE("lame parameters") {
  const LameParameters l = lame_parameters(Material{1e8, 0.4, 1.0, 0.0});
  CHECK(l.mu == doctest::Approx(35714285.714285714285714).epsilon(1e-15));
  CHECK(l.lambda == doctest::Approx(142857142.857142857142857).epsilon(1e-15));
}

TEST_CASE("deformation gradient kinematics") {
  const std::array<Vec2, 3> rest{Vec2(0.1, 0.2), Vec2(0.4, 0.25), Vec2(0.15, 0.6)};
  const ElementPrecomp e = precompute_element(rest, {0, 1, 2}, Material{});
  CHECK((deformation_gradient(e, rest) - Mat2::Identity()).norm() < 1e-14);
  const double th = 0.7;
  const Eigen::Rotation2Dd r(th);
  const std::array<Vec2, 3> rot{r * rest[0], r * rest[1], r * rest[2]};
  CHECK((deformation_gradient(e, rot) - r.toRotationMatrix()).norm() < 1e-14);
  const std::array<Vec2, 3> sc{1.3 * rest[0], 1.3 * rest[1], 1.3 * rest[2]};
  CHECK((deformation_gradient(e, sc) - 1.3 * Mat2::Identity()).norm() < 1e-14);
}

TEST_CASE("strain energy: closed-form element, rest, rigid, inverted") {
  // Unit-area element stretched by 1.1 along x.
  Body b;
  b.kind = BodyKind::DeformablePad;
  b.mesh.vertices = {{0, 0}, {2, 0}, {0, 1}};
  b.mesh.triangles = {{0, 1, 2}};
  b.mesh.rest_positions = b.mesh.vertices;
  b.mesh.rebuild_boundary();
  b.material = Material{1e8, 0.4, 1.0, 0.0};
  b.scripted.assign(3, 0);
  const Positions stretched{{0, 0}, {2.2, 0}, {0, 1}};
  CHECK(body_strain_energy(b, stretched) == doctest::Approx(994924.319440736028).epsilon(1e-13));
  CHECK(body_strain_energy(b, b.mesh.rest_positions) == 0.0);
  const Positions flipped{{0, 0}, {2, 0}, {0, -1}};
  CHECK(body_strain_energy(b, flipped) == std::numeric_limits<double>::infinity());
  const Positions flat{{0, 0}, {2, 0}, {4, 0}};
  CHECK(body_strain_energy(b, flat) == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(elastic_gradient(b, flipped), Error);

  const Body sq = square_body(2);
  const double bound = 1e-8 * sq.material.youngs_modulus * sq.mesh.area();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(-3.14, 3.14), sh(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const Positions x = rigid(sq.mesh.rest_positions, ang(rng), Vec2(sh(rng), sh(rng)));
    CHECK(body_strain_energy(sq, x) <= bound);
    CHECK(elastic_gradient(sq, x).norm() <= bound);
  }
  CHECK(elastic_gradient(sq, sq.mesh.rest_positions).norm() <= 1e-12 * sq.material.youngs_modulus);
}

TEST_CASE("strain energy non-negative on random valid states") {
  const Body b = square_body(2);
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    const Positions x = perturbed(b, rng, 5e-4);
    const double psi = body_strain_energy(b, x);
    if (std::isfinite(psi)) CHECK(psi >= 0.0);
  }
}

TEST_CASE("elastic gradient matches central differences") {
  const Body b = square_body(1);
  Eigen::AlignedBox2d box;
  for (const auto& p : b.mesh.rest_positions) box.extend(p);
  const double step = 1e-6 * box.diagonal().norm();
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Positions x = perturbed(b, rng, 3e-4);
    const Eigen::VectorXd g = elastic_gradient(b, x);
    const Eigen::VectorXd fd = fd_gradient(b, x, step);
    worst = std::max(worst, (g - fd).norm() / g.norm());
    // Force balance: translation invariance.
    double sx = 0.0, sy = 0.0;
    for (Eigen::Index i = 0; i < g.size(); i += 2) {
      sx += g(i);
      sy += g(i + 1);
    }
    CHECK(std::abs(sx) <= 1e-8 * g.norm());
    CHECK(std::abs(sy) <= 1e-8 * g.norm());
  }
  MESSAGE("worst relative gradient error " << worst);
  CHECK(worst <= 1e-5);
}

TEST_CASE("elastic hessian: consistency, symmetry, projection") {
  const Body b = square_body(1);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;

  const Eigen::MatrixXd rest_spd = Eigen::MatrixXd(elastic_hessian_spd(b, b.mesh.rest_positions));
  const Eigen::MatrixXd rest_raw = Eigen::MatrixXd(elastic_hessian(b, b.mesh.rest_positions));
  CHECK((rest_spd - rest_raw).norm() <= 1e-9 * rest_raw.norm());

  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Positions x = perturbed(b, rng, 3e-4);
    const Eigen::MatrixXd H = Eigen::MatrixXd(elastic_hessian(b, x));
    Eigen::VectorXd dir(H.rows());
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir(i) = n01(rng);
    dir *= 1e-7 / dir.norm();
    Positions xp = x, xm = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xp[i] += dir.segment<2>(2 * static_cast<Eigen::Index>(i));
      xm[i] -= dir.segment<2>(2 * static_cast<Eigen::Index>(i));
    }
    const Eigen::VectorXd fd = (elastic_gradient(b, xp) - elastic_gradient(b, xm)) / 2.0;
    const Eigen::VectorXd an = H * dir;
    worst = std::max(worst, (fd - an).norm() / an.norm());

    const Eigen::MatrixXd P = Eigen::MatrixXd(elastic_hessian_spd(b, x));
    const double norm = P.norm();
    CHECK((P - P.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * norm);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * norm);
  }
  MESSAGE("worst hessian-gradient consistency " << worst);
  CHECK(worst <= 1e-4);
}
