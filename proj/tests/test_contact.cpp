#include "graspsim/contact.hpp"
#include "graspsim/scene.hpp"
#include "oracles.hpp"
#include "random_scenes.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>

using namespace graspsim;

namespace {

double contact_energy(const ContactTopology& topo, const Positions& x, double dhat, double kappa) {
  return contact_energy_grad_hess(topo, x, active_pairs(topo, x, dhat), kappa, false).energy;
}

std::vector<std::array<int, 3>> as_triples(const ContactTopology& topo, const std::vector<ContactPair>& pairs) {
  std::vector<std::array<int, 3>> out;
  for (const auto& p : pairs) {
    const auto& e = topo.edges()[static_cast<std::size_t>(p.edge)];
    out.push_back({p.point, e.a, e.b});
  }
  std::sort(out.begin(), out.end());
  return out;
}

Positions add(const Positions& x, const Positions& d, double s) {
  Positions y = x;
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * d[i];
  return y;
}

Eigen::MatrixXd dense(const std::vector<Eigen::Triplet<double>>& t, int dofs) {
  return Eigen::MatrixXd(to_sparse(t, dofs));
}

}  // namespace

TEST_CASE("point-edge distance") {
  const Vec2 a(-1, 0), b(1, 0);
  auto r = point_edge_distance(Vec2(0, 0), a, b);
  CHECK(r.distance == 0.0);
  CHECK(r.t == 0.5);
  r = point_edge_distance(Vec2(0, 1), a, b);
  CHECK(r.distance == 1.0);
  CHECK(r.t == 0.5);
  r = point_edge_distance(Vec2(3, 1), a, b);
  CHECK(r.distance == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
  CHECK(r.t == 1.0);
  CHECK_THROWS_AS(point_edge_distance(Vec2(0, 1), a, a + Vec2(1e-13, 0)), GeometryError);
}

TEST_CASE("squared distance derivatives match finite differences") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Vec2 p(u(rng), u(rng)), a(u(rng), u(rng)), b(u(rng), u(rng));
    const auto d = point_edge_squared_distance_derivs(p, a, b);
    Eigen::Matrix<double, 6, 1> x;
    x << p, a, b;
    const double h = 1e-6;
    Eigen::Matrix<double, 6, 1> fd;
    Eigen::Matrix<double, 6, 6> fdh;
    for (int i = 0; i < 6; ++i) {
      auto xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      auto dp = point_edge_squared_distance_derivs(xp.segment<2>(0), xp.segment<2>(2), xp.segment<2>(4));
      auto dm = point_edge_squared_distance_derivs(xm.segment<2>(0), xm.segment<2>(2), xm.segment<2>(4));
      fd(i) = (dp.value - dm.value) / (2 * h);
      fdh.col(i) = (dp.gradient - dm.gradient) / (2 * h);
    }
    CHECK((fd - d.gradient).norm() <= 1e-6 * std::max(1.0, d.gradient.norm()));
    CHECK((fdh - d.hessian).norm() <= 1e-5 * std::max(1.0, d.hessian.norm()));
    CHECK(d.value == doctest::Approx(std::pow(oracle::segment_distance(p, a, b), 2)).epsilon(1e-12));
  }
}

TEST_CASE("barrier values") {
  CHECK(barrier(1.0, 1.0) == 0.0);
  CHECK(barrier(2.0, 1.0) == 0.0);
  CHECK(barrier(0.5, 1.0) == doctest::Approx(0.173286795139986327).epsilon(1e-15));
  const double dhat = 1e-3;
  CHECK(barrier(0.5 * dhat, dhat) == doctest::Approx(0.25 * dhat * dhat * std::log(2.0)).epsilon(1e-14));
  double prev = 0.0;
  for (double d = 0.5 * dhat; d > 1e-300; d *= 0.1) {
    const double b = barrier(d, dhat);
    CHECK(b > prev);
    prev = b;
  }
  CHECK(prev > 100.0 * barrier(0.5 * dhat, dhat));
  CHECK(barrier_derivative(dhat, dhat) == 0.0);
  CHECK(barrier_second_derivative(dhat, dhat) == 0.0);
  CHECK(std::abs(barrier_derivative(dhat * (1 - 1e-9), dhat)) < 1e-15);
  CHECK(std::abs(barrier_second_derivative(dhat * (1 - 1e-7), dhat)) < 1e-5);
  CHECK_THROWS_AS(barrier(0.0, dhat), Error);
  CHECK_THROWS_AS(barrier(-1e-5, dhat), Error);
  for (double d : {1e-5, 1e-4, 5e-4, 9e-4}) {
    const double h = 1e-10;
    CHECK(barrier_derivative(d, dhat) ==
          doctest::Approx((barrier(d + h, dhat) - barrier(d - h, dhat)) / (2 * h)).epsilon(1e-6));
    CHECK(barrier_second_derivative(d, dhat) ==
          doctest::Approx((barrier_derivative(d + h, dhat) - barrier_derivative(d - h, dhat)) / (2 * h)).epsilon(1e-5));
  }
}

TEST_CASE("active pairs equal the brute-force scan on random scenes") {
  std::mt19937_64 rng(2024);
  int nonempty = 0;
  for (int k = 0; k < 100; ++k) {
    const double dhat = 1e-3;
    const Scene scene = testing::random_contact_scene(rng, dhat);
    REQUIRE(scene.vertex_count() <= 200);
    const ContactTopology topo(scene);
    const Positions x = scene.positions();
    const auto pairs = active_pairs(topo, x, dhat);
    const auto got = as_triples(topo, pairs);
    const auto want = oracle::brute_force_pairs(scene, x, dhat);
    CHECK(got == want);
    nonempty += !want.empty();
    for (std::size_t i = 1; i < pairs.size(); ++i) CHECK(pairs[i - 1].key() < pairs[i].key());
  }
  CHECK(nonempty > 50);
}

TEST_CASE("parallel faces at half dhat: pair count equals the brute-force scan") {
  for (double max_edge : {0.004, 0.002, 0.001}) {
    ScenarioConfig cfg;
    cfg.jaw.max_edge = max_edge;
    const Scene base = build_scene(cfg);
    std::vector<Body> bodies{base.body(base.object_index())};
    Body pad = base.body(base.pad_index(0));
    pad.scripted.assign(pad.scripted.size(), 0);
    bodies.push_back(pad);
    // Rotate the pad so its contact face lies 0.5 dhat above the object top.
    double top = -1.0;
    for (const auto& p : bodies[0].mesh.vertices) top = std::max(top, p.y());
    double face = 1e9;
    Eigen::Rotation2Dd rot(-std::numbers::pi / 2);
    for (auto* list : {&bodies[1].mesh.vertices, &bodies[1].mesh.rest_positions})
      for (auto& p : *list) p = rot * p;
    for (const auto& p : bodies[1].mesh.vertices) face = std::min(face, p.y());
    Vec2 cx = Vec2::Zero();
    for (const auto& p : bodies[1].mesh.vertices) cx += p;
    cx /= static_cast<double>(bodies[1].mesh.vertices.size());
    for (auto* list : {&bodies[1].mesh.vertices, &bodies[1].mesh.rest_positions})
      for (auto& p : *list) p += Vec2(-cx.x(), top + 0.5 * cfg.physics.dhat - face);
    const Scene scene(bodies, Vec2(0, -9.81), cfg.physics.dhat, cfg.physics.kappa);
    const ContactTopology topo(scene);
    const auto got = as_triples(topo, active_pairs(topo, scene.positions(), cfg.physics.dhat));
    const auto want = oracle::brute_force_pairs(scene, scene.positions(), cfg.physics.dhat);
    CHECK(!want.empty());
    CHECK(got == want);
  }
}

TEST_CASE("jaws open at scene start: no pad-object pairs") {
  ScenarioConfig cfg;
  const Scene scene = build_scene(cfg);
  const ContactTopology topo(scene);
  for (const auto& p : active_pairs(topo, scene.positions(), cfg.physics.dhat)) {
    const int a = p.point_body, b = p.edge_body;
    const bool pad_obj = (a == scene.object_index() && scene.body(b).kind == BodyKind::DeformablePad) ||
                         (b == scene.object_index() && scene.body(a).kind == BodyKind::DeformablePad);
    CHECK(!pad_obj);
  }
}

TEST_CASE("contact energy: empty, finite differences, direction, projection") {
  const double dhat = 1e-3, kappa = 1e5;
  {
    ScenarioConfig cfg;
    const Scene scene = build_scene(cfg);
    const ContactTopology topo(scene);
    const auto r = contact_energy_grad_hess(topo, scene.positions(), {}, kappa);
    CHECK(r.energy == 0.0);
    CHECK(r.gradient.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.hessian.empty());
  }
  std::mt19937_64 rng(99);
  double worst = 0.0;
  int states = 0;
  while (states < 100) {
    const Scene scene = testing::random_contact_scene(rng, dhat, kappa);
    const ContactTopology topo(scene);
    const Positions x = scene.positions();
    const auto pairs = active_pairs(topo, x, dhat);
    if (pairs.empty()) continue;
    ++states;
    const auto r = contact_energy_grad_hess(topo, x, pairs, kappa);
    CHECK(r.energy > 0.0);
    const double h = 1e-9;
    Eigen::VectorXd fd(r.gradient.size());
    Positions y = x;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (int c = 0; c < 2; ++c) {
        y[i][c] = x[i][c] + h;
        const double ep = contact_energy(topo, y, dhat, kappa);
        y[i][c] = x[i][c] - h;
        const double em = contact_energy(topo, y, dhat, kappa);
        y[i][c] = x[i][c];
        fd(2 * static_cast<Eigen::Index>(i) + c) = (ep - em) / (2 * h);
      }
    worst = std::max(worst, (fd - r.gradient).norm() / r.gradient.norm());

    // Moving along -gradient separates the bodies.
    Positions step(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) step[i] = -r.gradient.segment<2>(2 * static_cast<Eigen::Index>(i));
    const double s = 1e-6 / r.gradient.cwiseAbs().maxCoeff();
    CHECK(min_candidate_distance(topo, add(x, step, s)) > min_candidate_distance(topo, x));

    const Eigen::MatrixXd H = dense(r.hessian, 2 * scene.vertex_count());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * H.norm());
  }
  MESSAGE("worst barrier gradient error " << worst);
  CHECK(worst <= 1e-5);
}

TEST_CASE("no force at a distance") {
  const double dhat = 1e-3;
  std::vector<Body> bodies{testing::make_body({{0, 0}, {0.01, 0}, {0.01, 0.01}, {0, 0.01}}, 1, Vec2::Zero(), 0.5),
                           testing::make_body({{0, 0}, {0.01, 0}, {0.01, 0.01}, {0, 0.01}}, 1,
                                              Vec2(0.0, 0.01 + dhat * (1 + 1e-9)), 0.5)};
  const Scene scene(bodies, Vec2(0, -9.81), dhat, 1e5);
  const ContactTopology topo(scene);
  const Positions x = scene.positions();
  const auto pairs = active_pairs(topo, x, dhat);
  CHECK(pairs.empty());
  const auto r = contact_energy_grad_hess(topo, x, pairs, 1e5);
  CHECK(r.energy == 0.0);
  CHECK(lag_friction(topo, x, pairs, 1e5).empty());
}

TEST_CASE("friction mollifier") {
  const double eps = 1e-5;
  CHECK(friction_f0(0.0, eps) == 0.0);
  CHECK(friction_f1(0.0, eps) == 0.0);
  CHECK(friction_f1(2 * eps, eps) == 1.0);
  for (double y : {0.1 * eps, 0.5 * eps, 0.9 * eps}) {
    CHECK(friction_f1(y, eps) == doctest::Approx(y * (2 - y / eps) / eps).epsilon(1e-14));
    const double h = 1e-12;
    CHECK(friction_f1(y, eps) ==
          doctest::Approx((friction_f0(y + h, eps) - friction_f0(y - h, eps)) / (2 * h)).epsilon(1e-6));
  }
  CHECK(friction_f0(eps * (1 - 1e-12), eps) == doctest::Approx(friction_f0(eps * (1 + 1e-12), eps)).epsilon(1e-9));
}

TEST_CASE("friction energy: zero slip, saturation, mu = 0, finite differences") {
  const double dhat = 1e-3, kappa = 1e5, eps_v = 1e-3, h = 0.01;
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n01;
  double worst = 0.0;
  int states = 0;
  while (states < 100) {
    const Scene scene = testing::random_contact_scene(rng, dhat, kappa);
    const ContactTopology topo(scene);
    const Positions prev = scene.positions();
    const auto pairs = active_pairs(topo, prev, dhat);
    if (pairs.empty()) continue;
    ++states;
    const auto data = lag_friction(topo, prev, pairs, kappa);
    REQUIRE(data.size() == pairs.size());
    for (const auto& d : data) CHECK(d.lambda >= 0.0);

    const auto zero = friction_energy_grad_hess(prev, prev, data, eps_v, h);
    CHECK(zero.energy == 0.0);
    CHECK(zero.gradient.cwiseAbs().maxCoeff() == 0.0);

    const double scale = (states % 2 == 0 ? 0.3 : 3.0) * eps_v * h;
    Positions x = prev;
    for (auto& p : x) p += scale * Vec2(n01(rng), n01(rng));
    const auto r = friction_energy_grad_hess(x, prev, data, eps_v, h);
    CHECK(r.energy >= 0.0);
    const double step = 1e-11;
    Eigen::VectorXd fd(r.gradient.size());
    Positions y = x;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (int c = 0; c < 2; ++c) {
        y[i][c] = x[i][c] + step;
        const double ep = friction_energy_grad_hess(y, prev, data, eps_v, h, false).energy;
        y[i][c] = x[i][c] - step;
        const double em = friction_energy_grad_hess(y, prev, data, eps_v, h, false).energy;
        y[i][c] = x[i][c];
        fd(2 * static_cast<Eigen::Index>(i) + c) = (ep - em) / (2 * step);
      }
    if (r.gradient.norm() > 0.0) worst = std::max(worst, (fd - r.gradient).norm() / r.gradient.norm());

    // Per-contact bound and saturation on a single datum.
    for (const auto& d : data) {
      const std::vector<FrictionDatum> one{d};
      Positions far = prev;
      far[static_cast<std::size_t>(d.point)] += 1e3 * eps_v * h * d.tangent;
      const auto s = friction_energy_grad_hess(far, prev, one, eps_v, h);
      const double mag = s.gradient.segment<2>(2 * d.point).norm();
      CHECK(mag <= d.mu * d.lambda * (1 + 1e-10));
      CHECK(mag == doctest::Approx(d.mu * d.lambda).epsilon(1e-8));
      FrictionDatum frictionless = d;
      frictionless.mu = 0.0;
      const std::vector<FrictionDatum> none{frictionless};
      CHECK(friction_energy_grad_hess(far, prev, none, eps_v, h).energy == 0.0);
    }
    const Eigen::MatrixXd H = dense(r.hessian, 2 * scene.vertex_count());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * std::max(1.0, H.norm()));
  }
  MESSAGE("worst friction gradient error " << worst);
  CHECK(worst <= 1e-5);
}

TEST_CASE("ccd: toi, uniform motion, head-on approach") {
  auto t = point_edge_toi(Vec2(0, 1), Vec2(-1, 0), Vec2(1, 0), Vec2(0, -2), Vec2::Zero(), Vec2::Zero());
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(!point_edge_toi(Vec2(0, 1), Vec2(-1, 0), Vec2(1, 0), Vec2(0, 0.5), Vec2::Zero(), Vec2::Zero()));
  CHECK(!point_edge_toi(Vec2(3, 1), Vec2(-1, 0), Vec2(1, 0), Vec2(0, -2), Vec2::Zero(), Vec2::Zero()));

  const double g = 1e-4;
  std::vector<Body> bodies{testing::make_body({{0, 0}, {0.01, 0}, {0.01, 0.01}, {0, 0.01}}, 0, Vec2::Zero(), 0.5),
                           testing::make_body({{0.005, 0.01 + g}, {0.01, 0.02}, {0.0, 0.02}}, 0, Vec2::Zero(), 0.5)};
  const Scene scene(bodies, Vec2(0, -9.81), 1e-3, 1e5);
  const ContactTopology topo(scene);
  const Positions x = scene.positions();
  Positions dir(x.size(), Vec2::Zero());
  for (int i = scene.vertex_offset(1); i < scene.vertex_count(); ++i) dir[static_cast<std::size_t>(i)] = Vec2(0, -2 * g);
  CHECK(ccd_max_step(topo, x, dir) == doctest::Approx(0.45).epsilon(1e-9));
  Positions same(x.size(), Vec2(0.3, -0.2));
  CHECK(ccd_max_step(topo, x, same) == 1.0);
}

TEST_CASE("ccd: substep sampling finds no crossing within the returned step") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n01;
  int blocked = 0;
  for (int k = 0; k < 100; ++k) {
    const double dhat = 1e-3;
    const Scene scene = testing::random_contact_scene(rng, dhat);
    const ContactTopology topo(scene);
    const Positions x = scene.positions();
    Positions dir(x.size());
    for (int b = 0; b < scene.body_count(); ++b) {
      const Vec2 v = 4e-3 * Vec2(n01(rng), n01(rng));
      for (int i = 0; i < static_cast<int>(scene.body(b).mesh.vertices.size()); ++i)
        dir[static_cast<std::size_t>(scene.vertex_offset(b) + i)] = v + 2e-4 * Vec2(n01(rng), n01(rng));
    }
    const double alpha = ccd_max_step(topo, x, dir);
    CHECK(alpha > 0.0);
    CHECK(alpha <= 1.0);
    blocked += alpha < 1.0;
    const auto rep = oracle::substep_crossings(scene, x, add(x, dir, alpha));
    CHECK(rep.crossings == 0);
    CHECK(rep.min_distance > 0.0);
  }
  MESSAGE("ccd-limited directions: " << blocked);
  CHECK(blocked > 10);
}
