#include "graspsim/scene.hpp"

#include "graspsim/contact.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace graspsim {

std::string to_string(BodyKind kind) {
  switch (kind) {
    case BodyKind::DeformablePad: return "DeformablePad";
    case BodyKind::RigidObject: return "RigidObject";
    case BodyKind::RigidBacking: return "RigidBacking";
    case BodyKind::Ground: return "Ground";
  }
  return "?";
}

bool Body::fully_scripted() const {
  return !scripted.empty() && std::all_of(scripted.begin(), scripted.end(), [](std::uint8_t s) { return s != 0; });
}

Scene::Scene(std::vector<Body> bodies, Vec2 gravity, double dhat, double kappa)
    : bodies_(std::move(bodies)), gravity_(std::move(gravity)), dhat_(dhat), kappa_(kappa) {
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (auto& b : bodies_) {
    if (b.scripted.size() != b.mesh.vertices.size()) b.scripted.resize(b.mesh.vertices.size(), 0);
    if (b.mesh.rest_positions.size() != b.mesh.vertices.size()) b.mesh.rest_positions = b.mesh.vertices;
    offsets_.push_back(offsets_.back() + static_cast<int>(b.mesh.vertices.size()));
    for (const auto& p : b.mesh.rest_positions) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  }
  length_scale_ = bodies_.empty() ? 1.0 : (hi - lo).norm();
}

int Scene::body_of_vertex(int global) const {
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), global);
  return static_cast<int>(it - offsets_.begin()) - 1;
}

Positions Scene::positions() const {
  Positions out;
  out.reserve(static_cast<std::size_t>(vertex_count()));
  for (const auto& b : bodies_) out.insert(out.end(), b.mesh.vertices.begin(), b.mesh.vertices.end());
  return out;
}

std::span<const Vec2> Scene::body_positions(std::span<const Vec2> all, int body) const {
  const auto i = static_cast<std::size_t>(body);
  return all.subspan(static_cast<std::size_t>(offsets_[i]), static_cast<std::size_t>(offsets_[i + 1] - offsets_[i]));
}

std::vector<std::uint8_t> Scene::scripted_mask() const {
  std::vector<std::uint8_t> mask;
  mask.reserve(static_cast<std::size_t>(vertex_count()));
  for (const auto& b : bodies_) mask.insert(mask.end(), b.scripted.begin(), b.scripted.end());
  return mask;
}

int Scene::find_first(BodyKind kind, int jaw) const {
  for (int i = 0; i < body_count(); ++i) {
    if (bodies_[static_cast<std::size_t>(i)].kind == kind && (jaw < 0 || bodies_[static_cast<std::size_t>(i)].jaw == jaw)) {
      return i;
    }
  }
  return -1;
}

bool Scene::contact_excluded(int a, int b) const {
  if (a == b) return true;
  const Body& ba = body(a);
  const Body& bb = body(b);
  if (ba.jaw >= 0 && ba.jaw == bb.jaw) {
    const bool welded = (ba.kind == BodyKind::DeformablePad && bb.kind == BodyKind::RigidBacking) ||
                        (ba.kind == BodyKind::RigidBacking && bb.kind == BodyKind::DeformablePad);
    if (welded) return true;
  }
  return ba.fully_scripted() && bb.fully_scripted();
}

double Scene::pair_friction(int a, int b) const {
  const Body& ba = body(a);
  const Body& bb = body(b);
  if (ba.kind == BodyKind::DeformablePad) return ba.material.friction_coeff;
  if (bb.kind == BodyKind::DeformablePad) return bb.material.friction_coeff;
  if (ba.kind == BodyKind::RigidObject) return ba.material.friction_coeff;
  if (bb.kind == BodyKind::RigidObject) return bb.material.friction_coeff;
  return ba.material.friction_coeff;
}

std::vector<Vec2> read_polygon_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open polygon file " + path.string());
  std::vector<Vec2> poly;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    double x = 0.0, y = 0.0;
    std::string extra;
    if (!(ss >> x >> y) || (ss >> extra)) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected 'x y'");
    }
    poly.emplace_back(x, y);
  }
  if (poly.size() < 3) throw InputError(path.string() + ": polygon needs at least 3 vertices");
  return poly;
}

std::vector<Vec2> object_polygon(const ObjectConfig& object, const std::filesystem::path& base_dir) {
  std::vector<Vec2> poly;
  if (!object.polygon_file.empty()) {
    std::filesystem::path p(object.polygon_file);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    poly = read_polygon_file(p);
  } else if (object.primitive == "square") {
    const double h = 0.5 * object.size;
    poly = {{-h, -h}, {h, -h}, {h, h}, {-h, h}};
  } else if (object.primitive == "rectangle") {
    const double hx = 0.5 * object.size, hy = 0.5 * object.height;
    poly = {{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}};
  } else if (object.primitive == "ngon") {
    if (object.sides < 3) throw InputError("object.sides must be >= 3");
    const double r = 0.5 * object.size;
    for (int k = 0; k < object.sides; ++k) {
      const double a = -M_PI / 2.0 + 2.0 * M_PI * (k + 0.5) / object.sides;
      poly.emplace_back(r * std::cos(a), r * std::sin(a));
    }
  } else {
    throw InputError("unknown object primitive '" + object.primitive + "'");
  }
  for (auto& p : poly) p *= object.scale;
  return poly;
}

double resting_gap(double weight, int contacts, double dhat, double kappa) {
  if (weight <= 0.0 || contacts <= 0) return dhat;
  const double per_pair = weight / contacts;
  // |b'(d)| decreases monotonically from +inf at 0 to 0 at dhat.
  double lo = 1e-12 * dhat, hi = dhat;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (kappa * -barrier_derivative(mid, dhat) > per_pair) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

Body make_rect_body(std::string name, BodyKind kind, const Material& m, const std::array<Vec2, 4>& corners) {
  Body b;
  b.name = std::move(name);
  b.kind = kind;
  b.material = m;
  b.mesh = triangulate(corners, 0);
  b.scripted.assign(b.mesh.vertices.size(), 1);
  return b;
}

void orient_ccw(TriMesh& mesh) {
  for (auto& t : mesh.triangles) {
    if (cross2(mesh.vertices[t[1]] - mesh.vertices[t[0]], mesh.vertices[t[2]] - mesh.vertices[t[0]]) < 0.0) {
      std::swap(t[1], t[2]);
    }
  }
  mesh.rest_positions = mesh.vertices;
  mesh.rebuild_boundary();
}

}  // namespace

Body build_object_body(const ScenarioConfig& config) {
  const PhysicsConfig& phys = config.physics;
  std::vector<Vec2> poly = object_polygon(config.object, config.base_dir);
  Body obj;
  obj.name = "object";
  obj.kind = BodyKind::RigidObject;
  obj.material = config.object.material;
  obj.mesh = triangulate(poly, config.object.subdivision);
  const double area = obj.mesh.area();
  Vec2 centroid = Vec2::Zero();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    centroid += (a + b) * cross2(a, b);
  }
  centroid /= 6.0 * area;
  const double c = std::cos(config.object.theta), s = std::sin(config.object.theta);
  for (auto& v : obj.mesh.vertices) {
    const Vec2 d = v - centroid;
    v = Vec2(c * d.x() - s * d.y() + config.object.x, s * d.x() + c * d.y());
  }
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& v : obj.mesh.vertices) lowest = std::min(lowest, v.y());
  double shift = 0.0;
  if (config.object.y) {
    shift = *config.object.y;
  } else {
    int touching = 0;
    for (const auto& v : obj.mesh.vertices) touching += (v.y() - lowest) <= 1e-9 * phys.dhat ? 1 : 0;
    const double weight = obj.material.density * area * phys.gravity.norm();
    shift = resting_gap(weight, touching, phys.dhat, phys.kappa) - lowest;
  }
  for (auto& v : obj.mesh.vertices) v.y() += shift;
  obj.mesh.rest_positions = obj.mesh.vertices;
  obj.scripted.assign(obj.mesh.vertices.size(), 0);
  return obj;
}

Scene build_scene(const ScenarioConfig& config) { return build_scene(config, config.default_grasp()); }

Scene build_scene(const ScenarioConfig& config, const GraspSpec& grasp) {
  config.object.material.validate("object.material");
  config.jaw.pad_material.validate("jaw.pad_material");
  const PhysicsConfig& phys = config.physics;
  std::vector<Body> bodies;

  bodies.push_back(build_object_body(config));

  // Jaws: pad (contact face toward the grasp center) welded to a rigid backing.
  const Vec2 axis = grasp.axis(), normal = grasp.normal();
  JawConfig jaw = config.jaw;
  for (int side = 0; side < 2; ++side) {
    const double sign = side == 0 ? -1.0 : 1.0;
    auto to_world = [&](const Vec2& local) {
      return Vec2(grasp.center + sign * (0.5 * grasp.max_width + local.x()) * axis + local.y() * normal);
    };
    Body pad;
    pad.name = side == 0 ? "pad_left" : "pad_right";
    pad.kind = BodyKind::DeformablePad;
    pad.material = jaw.pad_material;
    pad.jaw = side;
    std::vector<std::uint8_t> back;
    pad.mesh = mesh_pad(grasp.jaw_profile, jaw, &pad.thickness_pairs, &back);
    for (auto& v : pad.mesh.vertices) v = to_world(v);
    orient_ccw(pad.mesh);
    pad.scripted = back;
    bodies.push_back(std::move(pad));

    const double u0 = jaw.pad_thickness, u1 = jaw.pad_thickness + jaw.backing_thickness;
    const double h = 0.5 * jaw.pad_height;
    std::array<Vec2, 4> corners{to_world({u0, -h}), to_world({u1, -h}), to_world({u1, h}), to_world({u0, h})};
    if (cross2(corners[1] - corners[0], corners[2] - corners[0]) < 0.0) std::swap(corners[1], corners[3]);
    Material backing_material{1e11, 0.3, 7800.0, jaw.pad_material.friction_coeff};
    Body backing = make_rect_body(side == 0 ? "backing_left" : "backing_right", BodyKind::RigidBacking,
                                  backing_material, corners);
    backing.jaw = side;
    bodies.push_back(std::move(backing));
  }

  {
    const double w = phys.ground_half_width, d = phys.ground_depth;
    Material ground_material{1e11, 0.3, 2000.0, config.object.material.friction_coeff};
    bodies.push_back(make_rect_body("ground", BodyKind::Ground, ground_material, {{{-w, -d}, {w, -d}, {w, 0.0}, {-w, 0.0}}}));
  }

  Scene scene(std::move(bodies), phys.gravity, phys.dhat, phys.kappa);
  const ValidationReport report = validate_scene(scene, true);
  if (!report.empty()) throw GeometryError("invalid scene: " + report.to_string());
  return scene;
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < issues.size(); ++i) out << (i ? "; " : "") << issues[i].message;
  return out.str();
}

namespace {

bool inside_body(const Scene& scene, std::span<const Vec2> x, int body, const Vec2& p) {
  const Body& b = scene.body(body);
  const int off = scene.vertex_offset(body);
  for (const auto& t : b.mesh.triangles) {
    const Vec2& a = x[static_cast<std::size_t>(off + t[0])];
    const Vec2& c1 = x[static_cast<std::size_t>(off + t[1])];
    const Vec2& c2 = x[static_cast<std::size_t>(off + t[2])];
    const double o1 = cross2(c1 - a, p - a), o2 = cross2(c2 - c1, p - c1), o3 = cross2(a - c2, p - c2);
    if (o1 > 0 && o2 > 0 && o3 > 0) return true;
  }
  return false;
}

double boundary_distance(const Scene& scene, std::span<const Vec2> x, int pb, int eb, bool* inside_found,
                         double* deepest) {
  const Body& P = scene.body(pb);
  const Body& E = scene.body(eb);
  const int po = scene.vertex_offset(pb), eo = scene.vertex_offset(eb);
  std::vector<std::uint8_t> on_boundary(P.mesh.vertices.size(), 0);
  for (const auto& e : P.mesh.boundary_edges) on_boundary[e[0]] = on_boundary[e[1]] = 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < P.mesh.vertices.size(); ++v) {
    if (!on_boundary[v]) continue;
    const Vec2& p = x[static_cast<std::size_t>(po) + v];
    double dmin = std::numeric_limits<double>::infinity();
    for (const auto& e : E.mesh.boundary_edges) {
      const auto r = point_edge_distance(p, x[static_cast<std::size_t>(eo + e[0])], x[static_cast<std::size_t>(eo + e[1])]);
      dmin = std::min(dmin, r.distance);
    }
    if (inside_body(scene, x, eb, p)) {
      *inside_found = true;
      *deepest = std::min(*deepest, -dmin);
    }
    best = std::min(best, dmin);
  }
  return best;
}

bool boundaries_cross(const Scene& scene, std::span<const Vec2> x, int a, int b) {
  const int ao = scene.vertex_offset(a), bo = scene.vertex_offset(b);
  for (const auto& e : scene.body(a).mesh.boundary_edges) {
    const Vec2& p1 = x[static_cast<std::size_t>(ao + e[0])];
    const Vec2& p2 = x[static_cast<std::size_t>(ao + e[1])];
    for (const auto& f : scene.body(b).mesh.boundary_edges) {
      const Vec2& q1 = x[static_cast<std::size_t>(bo + f[0])];
      const Vec2& q2 = x[static_cast<std::size_t>(bo + f[1])];
      const double d1 = cross2(q2 - q1, p1 - q1), d2 = cross2(q2 - q1, p2 - q1);
      const double d3 = cross2(p2 - p1, q1 - p1), d4 = cross2(p2 - p1, q2 - p1);
      if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    }
  }
  return false;
}

}  // namespace

double signed_body_distance(const Scene& scene, std::span<const Vec2> x, int a, int b) {
  bool inside = false;
  double deepest = 0.0;
  const double dab = boundary_distance(scene, x, a, b, &inside, &deepest);
  const double dba = boundary_distance(scene, x, b, a, &inside, &deepest);
  if (inside) return deepest;
  if (boundaries_cross(scene, x, a, b)) return 0.0;
  return std::min(dab, dba);
}

ValidationReport validate_scene(const Scene& scene, bool check_composition) {
  const Positions x = scene.positions();
  return validate_scene(scene, x, check_composition);
}

ValidationReport validate_scene(const Scene& scene, std::span<const Vec2> x, bool check_composition) {
  using Kind = ValidationIssue::Kind;
  ValidationReport report;
  auto add = [&](Kind kind, std::string msg, int a = -1, int b = -1, int element = -1, double dist = 0.0) {
    report.issues.push_back({kind, std::move(msg), a, b, element, dist});
  };

  if (check_composition) {
    int ground = 0, pads = 0, backings = 0, objects = 0;
    for (const auto& b : scene.bodies()) {
      ground += b.kind == BodyKind::Ground;
      pads += b.kind == BodyKind::DeformablePad;
      backings += b.kind == BodyKind::RigidBacking;
      objects += b.kind == BodyKind::RigidObject;
    }
    if (ground != 1 || pads != 2 || backings != 2 || objects != 1) {
      std::ostringstream msg;
      msg << "scene composition: expected 1 ground, 2 pads, 2 backings, 1 object; found " << ground << ", " << pads
          << ", " << backings << ", " << objects;
      add(Kind::Composition, msg.str());
    }
    for (int jaw = 0; jaw < 2 && pads == 2 && backings == 2; ++jaw) {
      if (scene.pad_index(jaw) < 0 || scene.backing_index(jaw) < 0) {
        add(Kind::Composition, "jaw " + std::to_string(jaw) + " lacks a pad or backing");
      }
    }
  }

  for (int bi = 0; bi < scene.body_count(); ++bi) {
    const Body& b = scene.body(bi);
    try {
      b.material.validate("body '" + b.name + "' material");
    } catch (const InputError& e) {
      add(Kind::InvalidMaterial, e.what(), bi);
    }
    const int n = static_cast<int>(b.mesh.vertices.size());
    if (b.mesh.triangles.empty()) add(Kind::DegenerateMesh, "body '" + b.name + "' has no triangles", bi);
    std::vector<std::uint8_t> used(static_cast<std::size_t>(n), 0);
    bool in_range = true;
    for (std::size_t t = 0; t < b.mesh.triangles.size(); ++t) {
      for (int v : b.mesh.triangles[t]) {
        if (v < 0 || v >= n) {
          in_range = false;
          add(Kind::DegenerateMesh, "body '" + b.name + "' triangle " + std::to_string(t) + " index out of range", bi,
              -1, static_cast<int>(t));
        } else {
          used[static_cast<std::size_t>(v)] = 1;
        }
      }
    }
    if (!in_range) continue;
    for (int v = 0; v < n; ++v) {
      if (!used[static_cast<std::size_t>(v)]) {
        add(Kind::OrphanVertex, "body '" + b.name + "' vertex " + std::to_string(v) + " belongs to no triangle", bi);
      }
    }
    const auto bx = scene.body_positions(x, bi);
    for (std::size_t t = 0; t < b.mesh.triangles.size(); ++t) {
      const auto& tri = b.mesh.triangles[t];
      const double area2 = cross2(bx[tri[1]] - bx[tri[0]], bx[tri[2]] - bx[tri[0]]);
      const double rest2 = cross2(b.mesh.rest_positions[tri[1]] - b.mesh.rest_positions[tri[0]],
                                  b.mesh.rest_positions[tri[2]] - b.mesh.rest_positions[tri[0]]);
      if (area2 <= 0.0 || rest2 <= 0.0) {
        std::ostringstream msg;
        msg << "body '" << b.name << "' triangle " << t << " is inverted (signed area " << 0.5 * std::min(area2, rest2)
            << ")";
        add(Kind::InvertedElement, msg.str(), bi, -1, static_cast<int>(t), 0.5 * std::min(area2, rest2));
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if ((bx[static_cast<std::size_t>(i)] - bx[static_cast<std::size_t>(j)]).norm() < 1e-9) {
          add(Kind::DegenerateMesh,
              "body '" + b.name + "' vertices " + std::to_string(i) + " and " + std::to_string(j) + " coincide", bi);
        }
      }
    }
  }

  for (int a = 0; a < scene.body_count(); ++a) {
    for (int b = a + 1; b < scene.body_count(); ++b) {
      if (scene.contact_excluded(a, b)) continue;
      const double d = signed_body_distance(scene, x, a, b);
      if (d <= 0.0) {
        std::ostringstream msg;
        msg << "interpenetration between '" << scene.body(a).name << "' and '" << scene.body(b).name
            << "' (distance " << d << " m)";
        add(Kind::Interpenetration, msg.str(), a, b, -1, d);
      }
    }
  }
  return report;
}

std::vector<double> lumped_masses(const Body& body) {
  std::vector<double> m(body.mesh.vertices.size(), 0.0);
  for (const auto& t : body.mesh.triangles) {
    const auto& r = body.mesh.rest_positions;
    const double area = 0.5 * cross2(r[t[1]] - r[t[0]], r[t[2]] - r[t[0]]);
    const double share = body.material.density * area / 3.0;
    for (int v : t) m[static_cast<std::size_t>(v)] += share;
  }
  return m;
}

std::vector<double> lumped_masses(const Scene& scene) {
  std::vector<double> m;
  m.reserve(static_cast<std::size_t>(scene.vertex_count()));
  for (const auto& b : scene.bodies()) {
    const auto bm = lumped_masses(b);
    m.insert(m.end(), bm.begin(), bm.end());
  }
  return m;
}

}  // namespace graspsim
