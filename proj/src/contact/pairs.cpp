#include "graspsim/contact.hpp"
#include "graspsim/scene.hpp"
#include "graspsim/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace graspsim {

ContactTopology::ContactTopology(const Scene& scene) {
  bodies_ = scene.body_count();
  vertex_body_.resize(static_cast<std::size_t>(scene.vertex_count()));
  scripted_ = scene.scripted_mask();
  excluded_.assign(static_cast<std::size_t>(bodies_ * bodies_), 0);
  friction_.assign(static_cast<std::size_t>(bodies_ * bodies_), 0.0);
  std::vector<double> lengths;
  for (int b = 0; b < bodies_; ++b) {
    const Body& body = scene.body(b);
    const int off = scene.vertex_offset(b);
    for (std::size_t v = 0; v < body.mesh.vertices.size(); ++v) vertex_body_[static_cast<std::size_t>(off) + v] = b;
    std::vector<int> pts;
    for (std::size_t k = 0; k < body.mesh.boundary_edges.size(); ++k) {
      const auto& e = body.mesh.boundary_edges[k];
      edges_.push_back({off + e[0], off + e[1], b, static_cast<int>(k)});
      pts.push_back(off + e[0]);
      pts.push_back(off + e[1]);
      const auto& r = body.mesh.rest_positions;
      lengths.push_back((r[static_cast<std::size_t>(e[1])] - r[static_cast<std::size_t>(e[0])]).norm());
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    points_.insert(points_.end(), pts.begin(), pts.end());
    for (int c = 0; c < bodies_; ++c) {
      excluded_[static_cast<std::size_t>(b * bodies_ + c)] = scene.contact_excluded(b, c) ? 1 : 0;
      if (b != c) friction_[static_cast<std::size_t>(b * bodies_ + c)] = scene.pair_friction(b, c);
    }
  }
  if (!lengths.empty()) {
    auto mid = lengths.begin() + static_cast<std::ptrdiff_t>(lengths.size() / 2);
    std::nth_element(lengths.begin(), mid, lengths.end());
    typical_edge_ = *mid;
  }
}

bool ContactTopology::candidate(int point, int edge) const {
  const BoundaryEdge& e = edges_[static_cast<std::size_t>(edge)];
  const int pb = body_of(point);
  if (excluded_[static_cast<std::size_t>(pb * bodies_ + e.body)]) return false;
  return !(scripted_[static_cast<std::size_t>(point)] && scripted_[static_cast<std::size_t>(e.a)] &&
           scripted_[static_cast<std::size_t>(e.b)]);
}

double ContactTopology::friction(int point, int edge) const {
  return friction_[static_cast<std::size_t>(body_of(point) * bodies_ + edges_[static_cast<std::size_t>(edge)].body)];
}

namespace {

constexpr long long kMaxCellsPerBox = 4096;

struct CellRange {
  long long x0, x1, y0, y1;
  long long count() const { return (x1 - x0 + 1) * (y1 - y0 + 1); }
};

CellRange cells_of(const Eigen::AlignedBox2d& box, double cell) {
  return {static_cast<long long>(std::floor(box.min().x() / cell)), static_cast<long long>(std::floor(box.max().x() / cell)),
          static_cast<long long>(std::floor(box.min().y() / cell)), static_cast<long long>(std::floor(box.max().y() / cell))};
}

Eigen::AlignedBox2d edge_box(const Vec2& a, const Vec2& b, double inflate) {
  Eigen::AlignedBox2d box(a);
  box.extend(b);
  box.min().array() -= inflate;
  box.max().array() += inflate;
  return box;
}

}  // namespace

SpatialGrid::SpatialGrid(double cell, std::span<const Eigen::AlignedBox2d> boxes) : cell_(cell) {
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const CellRange r = cells_of(boxes[i], cell_);
    if (r.count() > kMaxCellsPerBox) {
      oversized_.push_back(static_cast<int>(i));
      continue;
    }
    for (long long ix = r.x0; ix <= r.x1; ++ix)
      for (long long iy = r.y0; iy <= r.y1; ++iy) entries_.emplace_back(key(ix, iy), static_cast<int>(i));
  }
  std::sort(entries_.begin(), entries_.end());
  box_count_ = static_cast<int>(boxes.size());
}

void SpatialGrid::query(const Eigen::AlignedBox2d& box, std::vector<int>& out) const {
  out.clear();
  const CellRange r = cells_of(box, cell_);
  if (r.count() > kMaxCellsPerBox) {
    out.resize(static_cast<std::size_t>(box_count_));
    for (int i = 0; i < box_count_; ++i) out[static_cast<std::size_t>(i)] = i;
    return;
  }
  for (long long ix = r.x0; ix <= r.x1; ++ix) {
    for (long long iy = r.y0; iy <= r.y1; ++iy) {
      const long long k = key(ix, iy);
      auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair<long long, int>{k, -1});
      for (; it != entries_.end() && it->first == k; ++it) out.push_back(it->second);
    }
  }
  out.insert(out.end(), oversized_.begin(), oversized_.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

namespace {

template <class Visit>
void for_each_near_pair(const ContactTopology& topo, std::span<const Vec2> x, double radius, Visit&& visit) {
  const auto& edges = topo.edges();
  std::vector<Eigen::AlignedBox2d> boxes;
  boxes.reserve(edges.size());
  for (const auto& e : edges)
    boxes.push_back(edge_box(x[static_cast<std::size_t>(e.a)], x[static_cast<std::size_t>(e.b)], radius));
  const SpatialGrid grid(std::max(radius, topo.typical_edge_length()), boxes);
  std::vector<int> hits;
  for (const int p : topo.points()) {
    const Vec2& xp = x[static_cast<std::size_t>(p)];
    const Eigen::AlignedBox2d pb(xp);
    grid.query(pb, hits);
    for (const int ei : hits) {
      if (!boxes[static_cast<std::size_t>(ei)].contains(xp)) continue;
      if (!topo.candidate(p, ei)) continue;
      visit(p, ei);
    }
  }
}

}  // namespace

std::vector<ContactPair> active_pairs(const ContactTopology& topo, std::span<const Vec2> x, double dhat) {
  std::vector<ContactPair> pairs;
  const auto& edges = topo.edges();
  for_each_near_pair(topo, x, dhat, [&](int p, int ei) {
    const BoundaryEdge& e = edges[static_cast<std::size_t>(ei)];
    const double d =
        point_edge_distance(x[static_cast<std::size_t>(p)], x[static_cast<std::size_t>(e.a)], x[static_cast<std::size_t>(e.b)])
            .distance;
    if (d < dhat) pairs.push_back({topo.body_of(p), p, e.body, ei, d, dhat});
  });
  std::sort(pairs.begin(), pairs.end(), [](const ContactPair& a, const ContactPair& b) { return a.key() < b.key(); });
  return pairs;
}

double min_pair_distance(const ContactTopology& topo, std::span<const Vec2> x, double radius) {
  double best = std::numeric_limits<double>::infinity();
  const auto& edges = topo.edges();
  for_each_near_pair(topo, x, radius, [&](int p, int ei) {
    const BoundaryEdge& e = edges[static_cast<std::size_t>(ei)];
    best = std::min(best, point_edge_distance(x[static_cast<std::size_t>(p)], x[static_cast<std::size_t>(e.a)],
                                              x[static_cast<std::size_t>(e.b)])
                              .distance);
  });
  return best;
}

namespace {

struct BatchBuffer {
  std::vector<double> px, py, ax, ay, bx, by;
  void add(const Vec2& p, const Vec2& a, const Vec2& b) {
    px.push_back(p.x());
    py.push_back(p.y());
    ax.push_back(a.x());
    ay.push_back(a.y());
    bx.push_back(b.x());
    by.push_back(b.y());
  }
  double min_distance() const {
    if (px.empty()) return std::numeric_limits<double>::infinity();
    const simd::PointEdgeBatch batch{px, py, ax, ay, bx, by};
    std::vector<double> d2(px.size()), t(px.size()), side(px.size());
    simd::kernels().point_edge(batch, d2.data(), t.data(), side.data());
    return std::sqrt(*std::min_element(d2.begin(), d2.end()));
  }
};

}  // namespace

double min_candidate_distance(const ContactTopology& topo, std::span<const Vec2> x) {
  BatchBuffer buf;
  const auto& edges = topo.edges();
  for (const int p : topo.points()) {
    for (std::size_t ei = 0; ei < edges.size(); ++ei) {
      if (!topo.candidate(p, static_cast<int>(ei))) continue;
      buf.add(x[static_cast<std::size_t>(p)], x[static_cast<std::size_t>(edges[ei].a)], x[static_cast<std::size_t>(edges[ei].b)]);
    }
  }
  return buf.min_distance();
}

double body_min_distance(const Scene& scene, std::span<const Vec2> x, int body_a, int body_b) {
  BatchBuffer buf;
  for (int pass = 0; pass < 2; ++pass) {
    const int pb = pass == 0 ? body_a : body_b;
    const int eb = pass == 0 ? body_b : body_a;
    const Body& P = scene.body(pb);
    const Body& E = scene.body(eb);
    const int po = scene.vertex_offset(pb), eo = scene.vertex_offset(eb);
    std::vector<int> pts;
    for (const auto& e : P.mesh.boundary_edges) {
      pts.push_back(e[0]);
      pts.push_back(e[1]);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    for (const int p : pts)
      for (const auto& e : E.mesh.boundary_edges)
        buf.add(x[static_cast<std::size_t>(po + p)], x[static_cast<std::size_t>(eo + e[0])], x[static_cast<std::size_t>(eo + e[1])]);
  }
  return buf.min_distance();
}

}  // namespace graspsim
