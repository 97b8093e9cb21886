#include "graspsim/contact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace graspsim {

namespace {

constexpr double kSafety = 0.9;
constexpr double kParamSlack = 1e-9;

// Position of p along segment (a, b) at time t: inside iff s in [0, 1].
bool on_segment(double t, const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& dp, const Vec2& da, const Vec2& db) {
  const Vec2 e = (b + t * db) - (a + t * da);
  const Vec2 q = (p + t * dp) - (a + t * da);
  const double ee = e.squaredNorm();
  if (ee == 0.0) return q.squaredNorm() == 0.0;
  const double s = q.dot(e) / ee;
  return s >= -kParamSlack && s <= 1.0 + kParamSlack;
}

// Real roots of c2 t^2 + c1 t + c0 in [0, 1 + slack], ascending. Near-tangent
// double roots with a slightly negative discriminant are kept.
int roots_in_unit(double c2, double c1, double c0, double scale, double out[2]) {
  int n = 0;
  auto keep = [&](double t) {
    if (t >= 0.0 && t <= 1.0 + 1e-12) out[n++] = std::min(t, 1.0);
  };
  const double tiny = 1e-14 * scale;
  if (std::abs(c2) <= tiny) {
    if (std::abs(c1) > tiny) keep(-c0 / c1);
    return n;
  }
  double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc < 0.0) {
    if (disc < -1e-10 * (c1 * c1 + std::abs(4.0 * c2 * c0))) return 0;
    disc = 0.0;
  }
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (c1 + (c1 < 0.0 ? -sq : sq));
  double r1 = q / c2;
  double r2 = q != 0.0 ? c0 / q : r1;
  if (r1 > r2) std::swap(r1, r2);
  keep(r1);
  if (r2 != r1) keep(r2);
  return n;
}

}  // namespace

std::optional<double> point_edge_toi(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& dp, const Vec2& da,
                                     const Vec2& db) {
  const Vec2 q0 = p - a, dq = dp - da;
  const Vec2 e0 = b - a, de = db - da;
  // cross(e(t), q(t)) = c0 + c1 t + c2 t^2
  const double c0 = cross2(e0, q0);
  const double c1 = cross2(e0, dq) + cross2(de, q0);
  const double c2 = cross2(de, dq);
  const double scale = (e0.norm() + de.norm()) * (q0.norm() + dq.norm());
  if (scale == 0.0) return std::nullopt;

  double best = std::numeric_limits<double>::infinity();
  const double tiny = 1e-14 * scale;
  if (std::abs(c0) <= tiny && std::abs(c1) <= tiny && std::abs(c2) <= tiny) {
    // Collinear throughout: contact happens when p reaches an endpoint.
    if (on_segment(0.0, p, a, b, dp, da, db)) return 0.0;
    for (int end = 0; end < 2; ++end) {
      const Vec2 r0 = end == 0 ? q0 : Vec2(p - b);
      const Vec2 dr = end == 0 ? dq : Vec2(dp - db);
      const double rr = dr.squaredNorm();
      if (rr == 0.0) continue;
      const double t = -r0.dot(dr) / rr;
      if (t >= 0.0 && t <= 1.0 && (r0 + t * dr).norm() <= 1e-12 * scale) best = std::min(best, t);
    }
  } else {
    double roots[2];
    const int n = roots_in_unit(c2, c1, c0, scale, roots);
    for (int i = 0; i < n; ++i) {
      if (on_segment(roots[i], p, a, b, dp, da, db)) {
        best = roots[i];
        break;
      }
    }
  }
  if (best == std::numeric_limits<double>::infinity()) return std::nullopt;
  return best;
}

double ccd_max_step(const ContactTopology& topo, std::span<const Vec2> x, std::span<const Vec2> direction) {
  const auto& edges = topo.edges();
  auto swept = [&](int v) {
    Eigen::AlignedBox2d box(x[static_cast<std::size_t>(v)]);
    box.extend(Vec2(x[static_cast<std::size_t>(v)] + direction[static_cast<std::size_t>(v)]));
    return box;
  };
  std::vector<Eigen::AlignedBox2d> boxes;
  boxes.reserve(edges.size());
  for (const auto& e : edges) boxes.push_back(swept(e.a).extend(swept(e.b)));
  const SpatialGrid grid(std::max(topo.typical_edge_length(), 1e-6), boxes);

  double earliest = std::numeric_limits<double>::infinity();
  std::vector<int> hits;
  for (const int p : topo.points()) {
    const Eigen::AlignedBox2d pb = swept(p);
    grid.query(pb, hits);
    for (const int ei : hits) {
      if (!boxes[static_cast<std::size_t>(ei)].intersects(pb)) continue;
      if (!topo.candidate(p, ei)) continue;
      const BoundaryEdge& e = edges[static_cast<std::size_t>(ei)];
      const auto t = point_edge_toi(x[static_cast<std::size_t>(p)], x[static_cast<std::size_t>(e.a)],
                                    x[static_cast<std::size_t>(e.b)], direction[static_cast<std::size_t>(p)],
                                    direction[static_cast<std::size_t>(e.a)], direction[static_cast<std::size_t>(e.b)]);
      if (t) earliest = std::min(earliest, *t);
    }
  }
  if (earliest > 1.0) return 1.0;
  return kSafety * earliest;
}

}  // namespace graspsim
