#include "graspsim/scene.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace graspsim {

namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross2(b - a, c - a); }

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= p.y() &&
         p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  return orient(a, b, p) >= 0 && orient(b, c, p) >= 0 && orient(c, a, p) >= 0;
}

double polygon_signed_area(std::span<const Vec2> poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) s += cross2(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * s;
}

void check_simple(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) {
        if ((poly[i] - poly[j]).norm() < 1e-12) {
          throw GeometryError("polygon has duplicate consecutive vertices " + std::to_string(i) + " and " +
                              std::to_string(j));
        }
        continue;
      }
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) {
        std::ostringstream msg;
        msg << "self-intersecting polygon: edge " << i << " (" << i << "-" << (i + 1) % n << ") intersects edge "
            << j << " (" << j << "-" << (j + 1) % n << ")";
        throw GeometryError(msg.str());
      }
    }
  }
}

}  // namespace

void TriMesh::rebuild_boundary() {
  std::map<std::pair<int, int>, std::pair<int, std::array<int, 2>>> count;
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[static_cast<std::size_t>(k)], b = t[static_cast<std::size_t>((k + 1) % 3)];
      auto& entry = count[{std::min(a, b), std::max(a, b)}];
      ++entry.first;
      entry.second = {a, b};
    }
  }
  boundary_edges.clear();
  for (const auto& [key, entry] : count) {
    if (entry.first == 1) boundary_edges.push_back(entry.second);
  }
}

double TriMesh::area() const {
  double s = 0.0;
  for (const auto& t : triangles) s += 0.5 * orient(rest_positions[t[0]], rest_positions[t[1]], rest_positions[t[2]]);
  return s;
}

TriMesh triangulate(std::span<const Vec2> polygon, int subdivision_level) {
  if (polygon.size() < 3) throw GeometryError("polygon needs at least 3 vertices");
  if (subdivision_level < 0) throw InputError("subdivision level must be >= 0");
  check_simple(polygon);
  if (polygon_signed_area(polygon) <= 0.0) throw GeometryError("polygon is not counterclockwise");

  TriMesh mesh;
  mesh.vertices.assign(polygon.begin(), polygon.end());

  // Ear clipping; always tries the ear after the first remaining vertex, which
  // yields a fan from vertex 0 on convex input.
  std::vector<int> remaining(polygon.size());
  std::iota(remaining.begin(), remaining.end(), 0);
  while (remaining.size() > 3) {
    const std::size_t m = remaining.size();
    bool clipped = false;
    for (std::size_t k = 0; k < m && !clipped; ++k) {
      const std::size_t i = (k + 1) % m;
      const int prev = remaining[(i + m - 1) % m], cur = remaining[i], next = remaining[(i + 1) % m];
      const Vec2 &a = polygon[prev], &b = polygon[cur], &c = polygon[next];
      if (orient(a, b, c) <= 0.0) continue;
      bool contains = false;
      for (int other : remaining) {
        if (other == prev || other == cur || other == next) continue;
        if (point_in_triangle(polygon[other], a, b, c)) {
          contains = true;
          break;
        }
      }
      if (contains) continue;
      mesh.triangles.push_back({prev, cur, next});
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(i));
      clipped = true;
    }
    if (!clipped) throw GeometryError("ear clipping failed (degenerate or collinear polygon)");
  }
  if (orient(polygon[remaining[0]], polygon[remaining[1]], polygon[remaining[2]]) <= 0.0) {
    throw GeometryError("ear clipping produced a degenerate triangle (collinear vertices)");
  }
  mesh.triangles.push_back({remaining[0], remaining[1], remaining[2]});

  for (int level = 0; level < subdivision_level; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int idx = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> refined;
    refined.reserve(mesh.triangles.size() * 4);
    for (const auto& t : mesh.triangles) {
      const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
      refined.push_back({t[0], ab, ca});
      refined.push_back({ab, t[1], bc});
      refined.push_back({ca, bc, t[2]});
      refined.push_back({ab, bc, ca});
    }
    mesh.triangles = std::move(refined);
  }

  mesh.rest_positions = mesh.vertices;
  mesh.rebuild_boundary();
  return mesh;
}

std::vector<Vec2> pad_profile(JawProfile profile, const JawConfig& jaw) {
  // Counterclockwise in (u, v): contact face at small u, back face at u = T.
  const double t = jaw.pad_thickness, half = 0.5 * jaw.pad_height;
  if (profile == JawProfile::Rectangular || jaw.rounded_sagitta <= 0.0) {
    return {{0.0, half}, {0.0, -half}, {t, -half}, {t, half}};
  }
  const int n = std::max(2, static_cast<int>(std::ceil(jaw.pad_height / jaw.max_edge)));
  std::vector<Vec2> poly;
  const double s = jaw.rounded_sagitta;
  const double r = (half * half + s * s) / (2.0 * s);
  for (int j = n; j >= 0; --j) {
    const double v = -half + jaw.pad_height * j / n;
    poly.emplace_back(r - std::sqrt(r * r - v * v), v);
  }
  poly.emplace_back(t, -half);
  poly.emplace_back(t, half);
  return poly;
}

TriMesh mesh_pad(JawProfile profile, const JawConfig& jaw, std::vector<std::array<int, 2>>* thickness_pairs,
                 std::vector<std::uint8_t>* back_face) {
  const double t = jaw.pad_thickness, half = 0.5 * jaw.pad_height;
  const double spacing = jaw.max_edge / std::sqrt(2.0);  // keeps quad diagonals within max_edge
  const int nv = std::max(1, static_cast<int>(std::ceil(jaw.pad_height / spacing - 1e-9)));
  const int nu = std::max(1, static_cast<int>(std::ceil(t / spacing - 1e-9)));
  const bool rounded = profile == JawProfile::Rounded && jaw.rounded_sagitta > 0.0;
  const double s = jaw.rounded_sagitta;
  const double r = rounded ? (half * half + s * s) / (2.0 * s) : 0.0;

  TriMesh mesh;
  auto index = [nu](int i, int j) { return j * (nu + 1) + i; };
  for (int j = 0; j <= nv; ++j) {
    const double v = -half + jaw.pad_height * j / nv;
    const double front = rounded ? r - std::sqrt(std::max(0.0, r * r - v * v)) : 0.0;
    for (int i = 0; i <= nu; ++i) mesh.vertices.emplace_back(front + (t - front) * i / nu, v);
  }
  for (int j = 0; j < nv; ++j) {
    // Diagonals mirror about v = 0 so the mesh is symmetric across the axis.
    const bool lower_half = (j + 0.5) < 0.5 * nv;
    for (int i = 0; i < nu; ++i) {
      const int a = index(i, j), b = index(i + 1, j), c = index(i + 1, j + 1), d = index(i, j + 1);
      if (lower_half) {
        mesh.triangles.push_back({a, b, c});
        mesh.triangles.push_back({a, c, d});
      } else {
        mesh.triangles.push_back({a, b, d});
        mesh.triangles.push_back({b, c, d});
      }
    }
  }
  mesh.rest_positions = mesh.vertices;
  mesh.rebuild_boundary();
  if (thickness_pairs != nullptr) {
    thickness_pairs->clear();
    for (int j = 0; j <= nv; ++j) thickness_pairs->push_back({index(nu, j), index(0, j)});
  }
  if (back_face != nullptr) {
    back_face->assign(mesh.vertices.size(), 0);
    for (int j = 0; j <= nv; ++j) (*back_face)[static_cast<std::size_t>(index(nu, j))] = 1;
  }
  return mesh;
}

}  // namespace graspsim
