#pragma once
// Planar grasp scene: meshed pads, rigid object polygon, rigid backings, ground slab.

#include "graspsim/common.hpp"
#include "graspsim/config.hpp"
#include "graspsim/grasp_spec.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace graspsim {

struct TriMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> boundary_edges;
  std::vector<Vec2> rest_positions;

  /// Recomputes boundary_edges as the edges owned by exactly one triangle,
  /// oriented as they appear in that triangle.
  void rebuild_boundary();
  double area() const;
};

enum class BodyKind { DeformablePad, RigidObject, RigidBacking, Ground };

std::string to_string(BodyKind kind);

struct Body {
  std::string name;
  BodyKind kind = BodyKind::RigidObject;
  TriMesh mesh;
  Material material;
  std::vector<std::uint8_t> scripted;  // per vertex
  int jaw = -1;                        // 0 or 1 for pads and backings
  /// Pads only: (back vertex, front vertex) pairs spanning the pad thickness.
  std::vector<std::array<int, 2>> thickness_pairs;

  bool fully_scripted() const;
};

/// Immutable once built. Vertex data of all bodies is addressed through a
/// global index: global = vertex_offset(body) + local.
class Scene {
 public:
  Scene() = default;
  Scene(std::vector<Body> bodies, Vec2 gravity, double dhat, double kappa);

  const std::vector<Body>& bodies() const { return bodies_; }
  const Body& body(int i) const { return bodies_[static_cast<std::size_t>(i)]; }
  int body_count() const { return static_cast<int>(bodies_.size()); }
  const Vec2& gravity() const { return gravity_; }
  double dhat() const { return dhat_; }
  double kappa() const { return kappa_; }

  int vertex_offset(int body) const { return offsets_[static_cast<std::size_t>(body)]; }
  int vertex_count() const { return offsets_.back(); }
  int body_of_vertex(int global) const;

  /// Concatenated current vertex positions of all bodies.
  Positions positions() const;
  std::span<const Vec2> body_positions(std::span<const Vec2> all, int body) const;
  std::vector<std::uint8_t> scripted_mask() const;

  int find_first(BodyKind kind, int jaw = -1) const;  // -1 if absent
  int object_index() const { return find_first(BodyKind::RigidObject); }
  int ground_index() const { return find_first(BodyKind::Ground); }
  int pad_index(int jaw) const { return find_first(BodyKind::DeformablePad, jaw); }
  int backing_index(int jaw) const { return find_first(BodyKind::RigidBacking, jaw); }

  /// Pairs of bodies whose contact is never evaluated: a pad and its own
  /// backing (welded), and two fully scripted bodies.
  bool contact_excluded(int body_a, int body_b) const;

  /// Friction coefficient for a body pair: a pad's coefficient wins, then the
  /// object's, then the first body's.
  double pair_friction(int body_a, int body_b) const;

  /// Bounding-box diagonal of all rest positions.
  double length_scale() const { return length_scale_; }

 private:
  std::vector<Body> bodies_;
  std::vector<int> offsets_{0};
  Vec2 gravity_{0.0, -9.81};
  double dhat_ = 1e-3;
  double kappa_ = 1e5;
  double length_scale_ = 1.0;
};

/// Triangulates a simple counterclockwise polygon by ear clipping, then
/// applies `subdivision_level` rounds of midpoint refinement (4x triangles each).
/// Throws GeometryError naming the offending edge pair for self-intersecting input.
TriMesh triangulate(std::span<const Vec2> polygon, int subdivision_level);

/// Pad cross-section polygon in local jaw coordinates: u from the contact face
/// (u = 0 at the apex) outward to the back face, v across the closing axis.
std::vector<Vec2> pad_profile(JawProfile profile, const JawConfig& jaw);

/// Structured pad mesh in local coordinates with edges no longer than `max_edge`.
/// thickness_pairs and a back-face vertex flag are filled in.
TriMesh mesh_pad(JawProfile profile, const JawConfig& jaw, std::vector<std::array<int, 2>>* thickness_pairs,
                 std::vector<std::uint8_t>* back_face);

std::vector<Vec2> read_polygon_file(const std::filesystem::path& path);
std::vector<Vec2> object_polygon(const ObjectConfig& object, const std::filesystem::path& base_dir);

/// Barrier gap at which `contacts` point-edge pairs carry weight m*|g|.
double resting_gap(double weight, int contacts, double dhat, double kappa);

/// The object alone, centered at its pose and resting on the ground unless y is set.
Body build_object_body(const ScenarioConfig& config);

/// Builds the full grasp scene with the jaws open at `grasp` and the object
/// resting on the ground. Throws GeometryError on initial interpenetration.
Scene build_scene(const ScenarioConfig& config, const GraspSpec& grasp);
Scene build_scene(const ScenarioConfig& config);

struct ValidationIssue {
  enum class Kind { InvertedElement, Interpenetration, OrphanVertex, Composition, InvalidMaterial, DegenerateMesh };
  Kind kind;
  std::string message;
  int body_a = -1;
  int body_b = -1;
  int element = -1;
  double distance = 0.0;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool empty() const { return issues.empty(); }
  std::string to_string() const;
};

/// Signed minimum boundary distance between two bodies: negative penetration
/// depth when a vertex of one lies inside the other, 0 for crossing boundaries.
double signed_body_distance(const Scene& scene, std::span<const Vec2> positions, int body_a, int body_b);

/// `check_composition` requires the full grasp layout (1 ground, 2 pads,
/// 2 backings, 1 object).
ValidationReport validate_scene(const Scene& scene, bool check_composition = true);
ValidationReport validate_scene(const Scene& scene, std::span<const Vec2> positions, bool check_composition);

/// Per-vertex lumped mass (kg): one third of density * rest area of each incident triangle.
std::vector<double> lumped_masses(const Scene& scene);
std::vector<double> lumped_masses(const Body& body);

}  // namespace graspsim
