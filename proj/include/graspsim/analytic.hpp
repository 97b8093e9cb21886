#pragma once
// Quasistatic planar soft-point-contact baseline: two jaw contacts with
// Coulomb friction and a bounded contact torque must balance gravity.

#include "graspsim/common.hpp"
#include "graspsim/config.hpp"
#include "graspsim/grasp_spec.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace graspsim {

struct ContactModelInput {
  std::array<Vec2, 2> points{Vec2::Zero(), Vec2::Zero()};
  std::array<Vec2, 2> normals{Vec2::UnitX(), -Vec2::UnitX()};  // inward, unit
  double mu = 0.4;
  double max_normal_force = 1.5e5;
  double torsion_ratio = 0.005;  // m
  double mass = 1.0;             // kg
  Vec2 center_of_mass = Vec2::Zero();
  double gravity = 9.81;

  void validate() const;
};

/// Contacts where the closing path (the axis segment between the open jaw
/// faces) meets the polygon boundary: the first crossing from each jaw side,
/// with inward normals along the closing axis. Empty when the path misses.
std::optional<ContactModelInput> find_contacts(std::span<const Vec2> polygon, const GraspSpec& grasp);

/// Feasibility of contact forces f_n in [0, f_max], |f_t| <= mu f_n,
/// |gamma| <= ratio f_n balancing gravity about the center of mass.
bool wrench_resistance(const ContactModelInput& input);

/// Dense feasibility test for { x >= 0 : A_eq x = b_eq, A_ub x <= b_ub }
/// by phase-one simplex with Bland's rule.
bool lp_feasible(const Eigen::MatrixXd& A_eq, const Eigen::VectorXd& b_eq, const Eigen::MatrixXd& A_ub,
                 const Eigen::VectorXd& b_ub, double tolerance = 1e-9);

struct AnalyticPrediction {
  bool success = false;
  bool miss = false;
};

/// Baseline prediction for a grasp on the scenario's object at its configured pose.
AnalyticPrediction predict_analytic(const ScenarioConfig& config, const GraspSpec& grasp);

/// Object polygon placed at the scenario pose (resting on the ground unless y is set).
std::vector<Vec2> placed_object_polygon(const ScenarioConfig& config);

}  // namespace graspsim
