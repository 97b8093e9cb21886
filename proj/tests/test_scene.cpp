#include "graspsim/scene.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace graspsim;

namespace {

std::vector<Vec2> unit_square() { return {{0, 0}, {1, 0}, {1, 1}, {0, 1}}; }

double polygon_area(const std::vector<Vec2>& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) a += cross2(p[i], p[(i + 1) % p.size()]);
  return 0.5 * a;
}

Body body_from(const TriMesh& mesh, double density) {
  Body b;
  b.mesh = mesh;
  b.material.density = density;
  b.scripted.assign(mesh.vertices.size(), 0);
  return b;
}

}  // namespace

TEST_CASE("triangulate: square and pentagon counts") {
  const auto sq = unit_square();
  const TriMesh m0 = triangulate(sq, 0);
  CHECK(m0.triangles.size() == 2);
  CHECK(m0.vertices.size() == 4);
  for (int k = 1; k <= 4; ++k) CHECK(triangulate(sq, k).triangles.size() == 2u * (1u << (2 * k)));

  std::vector<Vec2> pent;
  for (int i = 0; i < 5; ++i) {
    const double a = 2.0 * std::numbers::pi * i / 5.0;
    pent.emplace_back(std::cos(a), std::sin(a));
  }
  CHECK(triangulate(pent, 0).triangles.size() == 3);
}

TEST_CASE("triangulate: positive areas, area preserved, conforming boundary") {
  const std::vector<Vec2> poly{{0, 0}, {2, 0}, {2, 1}, {1, 0.4}, {0, 1}};
  const double area = polygon_area(poly);
  for (int k = 0; k <= 3; ++k) {
    const TriMesh m = triangulate(poly, k);
    for (const auto& t : m.triangles) {
      CHECK(cross2(m.vertices[t[1]] - m.vertices[t[0]], m.vertices[t[2]] - m.vertices[t[0]]) > 0.0);
    }
    CHECK(std::abs(m.area() - area) <= 1e-10 * area);
    double perimeter = 0.0;
    for (const auto& e : m.boundary_edges) perimeter += (m.vertices[e[1]] - m.vertices[e[0]]).norm();
    double expected = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) expected += (poly[(i + 1) % poly.size()] - poly[i]).norm();
    CHECK(perimeter == doctest::Approx(expected).epsilon(1e-12));
    for (std::size_t i = 0; i < m.vertices.size(); ++i)
      for (std::size_t j = i + 1; j < m.vertices.size(); ++j) CHECK((m.vertices[i] - m.vertices[j]).norm() > 1e-9);
  }
}

TEST_CASE("triangulate: self-intersecting polygon rejected") {
  const std::vector<Vec2> bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  CHECK_THROWS_AS(triangulate(bowtie, 0), GeometryError);
}

TEST_CASE("lumped masses") {
  TriMesh tri;
  tri.vertices = {{0, 0}, {1, 0}, {0, 1}};
  tri.triangles = {{0, 1, 2}};
  tri.rest_positions = tri.vertices;
  tri.rebuild_boundary();
  for (double m : lumped_masses(body_from(tri, 3.0))) CHECK(m == doctest::Approx(0.5).epsilon(1e-15));

  auto total = [](const std::vector<double>& m) {
    double s = 0.0;
    for (double v : m) s += v;
    return s;
  };
  CHECK(total(lumped_masses(body_from(triangulate(unit_square(), 0), 1.0))) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(total(lumped_masses(body_from(triangulate(unit_square(), 2), 1.0))) - 1.0) <= 1e-12);
  for (int k = 0; k <= 4; ++k) {
    CHECK(std::abs(total(lumped_masses(body_from(triangulate(unit_square(), k), 1.0))) - 1.0) <= 1e-10);
  }
}

TEST_CASE("build_scene: composition, profiles, determinism") {
  ScenarioConfig cfg;
  const Scene s = build_scene(cfg);
  CHECK(s.body_count() == 6);
  CHECK(s.object_index() >= 0);
  CHECK(s.ground_index() >= 0);
  CHECK(s.pad_index(0) >= 0);
  CHECK(s.pad_index(1) >= 0);
  CHECK(s.backing_index(0) >= 0);
  CHECK(s.backing_index(1) >= 0);
  CHECK(validate_scene(s).empty());

  const Scene again = build_scene(cfg);
  const Positions a = s.positions(), b = again.positions();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i].array() == b[i].array()).all());

  // Pad vertices attached to the backing are scripted, the rest are free.
  const Body& pad = s.body(s.pad_index(0));
  int scripted = 0;
  for (auto f : pad.scripted) scripted += f;
  CHECK(scripted > 0);
  CHECK(scripted < static_cast<int>(pad.scripted.size()));
  CHECK(s.body(s.backing_index(0)).fully_scripted());

  JawConfig jaw;
  const auto rect = pad_profile(JawProfile::Rectangular, jaw);
  const auto round = pad_profile(JawProfile::Rounded, jaw);
  double rect_corner = 1.0, round_corner = 0.0, round_apex = 1.0;
  for (const auto& p : rect)
    if (std::abs(std::abs(p.y()) - 0.5 * jaw.pad_height) < 1e-12) rect_corner = std::min(rect_corner, p.x());
  for (const auto& p : round) {
    if (std::abs(std::abs(p.y()) - 0.5 * jaw.pad_height) < 1e-12 && p.x() < jaw.pad_thickness)
      round_corner = std::max(round_corner, p.x());
    round_apex = std::min(round_apex, p.x());
  }
  CHECK(rect_corner == 0.0);
  CHECK(round_apex == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(round_corner == doctest::Approx(jaw.rounded_sagitta).epsilon(1e-12));

  cfg.jaw.profile = JawProfile::Rectangular;
  CHECK(validate_scene(build_scene(cfg)).empty());
}

TEST_CASE("validate_scene: flipped triangle and ground overlap") {
  ScenarioConfig cfg;
  const Scene s = build_scene(cfg);
  {
    std::vector<Body> bodies = s.bodies();
    Body& pad = bodies[static_cast<std::size_t>(s.pad_index(0))];
    std::swap(pad.mesh.triangles[3][1], pad.mesh.triangles[3][2]);
    const ValidationReport r = validate_scene(Scene(bodies, s.gravity(), s.dhat(), s.kappa()));
    bool named = false;
    for (const auto& issue : r.issues)
      named |= issue.kind == ValidationIssue::Kind::InvertedElement && issue.element == 3;
    CHECK(named);
  }
  {
    std::vector<Body> bodies = s.bodies();
    Body& obj = bodies[static_cast<std::size_t>(s.object_index())];
    double lowest = 1.0;
    for (const auto& p : obj.mesh.vertices) lowest = std::min(lowest, p.y());
    for (auto* list : {&obj.mesh.vertices, &obj.mesh.rest_positions})
      for (auto& p : *list) p.y() -= lowest + 0.001;
    const ValidationReport r = validate_scene(Scene(bodies, s.gravity(), s.dhat(), s.kappa()));
    bool found = false;
    for (const auto& issue : r.issues) {
      if (issue.kind != ValidationIssue::Kind::Interpenetration) continue;
      found = true;
      CHECK(issue.distance == doctest::Approx(-0.001).epsilon(1e-9));
    }
    CHECK(found);
  }
}

TEST_CASE("build_scene: initial interpenetration rejected") {
  ScenarioConfig cfg;
  cfg.grasp_center = Vec2(0.0, 0.0);
  CHECK_THROWS_AS(build_scene(cfg), GeometryError);
}
