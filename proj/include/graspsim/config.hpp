#pragma once
// ScenarioConfig: the JSON-compatible description of a grasp scenario.

#include "graspsim/common.hpp"
#include "graspsim/grasp_spec.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace graspsim {

struct Material {
  double youngs_modulus = 1e8;  // Pa
  double poisson_ratio = 0.4;
  double density = 1100.0;  // kg/m^2 (planar, 1 m out-of-plane depth)
  double friction_coeff = 0.4;

  /// Throws InputError naming the first violated invariant.
  void validate(const std::string& context) const;
};

struct ObjectConfig {
  std::string primitive = "square";  // square | rectangle | ngon
  std::string polygon_file;          // overrides primitive when non-empty
  double size = 0.04;                // square side, ngon circumradius*2, rectangle width
  double height = 0.04;              // rectangle only
  int sides = 6;                     // ngon only
  double scale = 1.0;
  double x = 0.0;
  std::optional<double> y;  // absent: rest on the ground
  double theta = 0.0;
  int subdivision = 0;
  Material material{1e11, 0.4, 1150.0, 0.4};
};

struct JawConfig {
  JawProfile profile = JawProfile::Rounded;
  Material pad_material{1e8, 0.4, 1100.0, 0.4};
  double max_width = 0.08;
  double closing_speed = 0.05;
  double lift_speed = 0.05;
  double pad_thickness = 0.01;   // along the closing axis
  double pad_height = 0.02;      // across the closing axis
  double rounded_sagitta = 0.003;
  double backing_thickness = 0.005;
  double max_edge = 0.002;
};

struct PhysicsConfig {
  Vec2 gravity{0.0, -9.81};
  double dhat = 1e-3;
  double kappa = 1e5;
  double timestep = 0.01;
  double newton_tol = 1e-3;
  int max_newton_iters = 200;
  double eps_v = 1e-3;
  double psi_threshold = 5e4;
  double psi_unit = 1e-3;  // J per metre of depth for one threshold unit
  double psi_balance = 0.1;
  std::optional<double> contact_eps;  // default: dhat
  double lift_clearance = 0.02;
  double settle_time = 0.25;
  double ground_half_width = 0.25;
  double ground_depth = 0.02;

  double effective_contact_eps() const { return contact_eps.value_or(dhat); }
};

struct PerturbationModel {
  double translation_std = 0.001;  // m
  double rotation_std = 0.003;     // rad
};

struct AnalyticConfig {
  double max_normal_force = 1.5e5;  // N per metre of depth
  double torsion_ratio = 0.005;   // m
};

struct ScenarioConfig {
  ObjectConfig object;
  JawConfig jaw;
  PhysicsConfig physics;
  PerturbationModel perturbation;
  AnalyticConfig analytic;
  Vec2 grasp_center{0.0, 0.02};
  double grasp_angle = 0.0;
  std::uint64_t seed = 0;
  std::filesystem::path base_dir;  // for resolving relative polygon files

  /// Grasp at the config's default pose with the jaw settings applied.
  GraspSpec default_grasp() const;
  /// Copies jaw settings (width, speeds, profile) into a grasp at the given pose.
  GraspSpec grasp_at(const Vec2& center, double angle) const;
};

ScenarioConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const ScenarioConfig& config);
ScenarioConfig load_config(const std::filesystem::path& path);

}  // namespace graspsim
