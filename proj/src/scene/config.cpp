#include "graspsim/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace graspsim {

using nlohmann::json;

std::string to_string(JawProfile profile) {
  return profile == JawProfile::Rectangular ? "rectangular" : "rounded";
}

JawProfile parse_jaw_profile(const std::string& name) {
  if (name == "rectangular") return JawProfile::Rectangular;
  if (name == "rounded") return JawProfile::Rounded;
  throw InputError("unknown jaw profile '" + name + "' (expected rectangular or rounded)");
}

Vec2 GraspSpec::axis() const { return {std::cos(axis_angle), std::sin(axis_angle)}; }
Vec2 GraspSpec::normal() const { return {-std::sin(axis_angle), std::cos(axis_angle)}; }

void Material::validate(const std::string& context) const {
  auto fail = [&](const std::string& what) { throw InputError(context + ": " + what); };
  if (!(youngs_modulus > 0.0)) fail("youngs_modulus must be > 0");
  if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5)) fail("poisson_ratio must be in [0, 0.5)");
  if (!(density > 0.0)) fail("density must be > 0");
  if (!(friction_coeff >= 0.0)) fail("friction_coeff must be >= 0");
}

GraspSpec ScenarioConfig::grasp_at(const Vec2& center, double angle) const {
  GraspSpec g;
  g.center = center;
  g.axis_angle = angle;
  g.max_width = jaw.max_width;
  g.closing_speed = jaw.closing_speed;
  g.lift_speed = jaw.lift_speed;
  g.jaw_profile = jaw.profile;
  return g;
}

GraspSpec ScenarioConfig::default_grasp() const { return grasp_at(grasp_center, grasp_angle); }

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw InputError(where + ": unknown field '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(where + "." + key + ": " + e.what());
  }
}

Vec2 read_vec2(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw InputError(where + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Material read_material(const json& j, Material m, const std::string& where) {
  check_keys(j, where, {"youngs_modulus", "poisson_ratio", "density", "friction_coeff"});
  read(j, "youngs_modulus", m.youngs_modulus, where);
  read(j, "poisson_ratio", m.poisson_ratio, where);
  read(j, "density", m.density, where);
  read(j, "friction_coeff", m.friction_coeff, where);
  m.validate(where);
  return m;
}

json material_json(const Material& m) {
  return {{"youngs_modulus", m.youngs_modulus},
          {"poisson_ratio", m.poisson_ratio},
          {"density", m.density},
          {"friction_coeff", m.friction_coeff}};
}

}  // namespace

ScenarioConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  ScenarioConfig c;
  c.base_dir = base_dir;
  check_keys(j, "config", {"object", "jaw", "physics", "perturbation", "analytic", "grasp", "seed"});

  if (j.contains("object")) {
    const json& o = j["object"];
    check_keys(o, "object", {"primitive", "polygon_file", "size", "height", "sides", "scale", "pose",
                             "subdivision", "material"});
    read(o, "primitive", c.object.primitive, "object");
    read(o, "polygon_file", c.object.polygon_file, "object");
    read(o, "size", c.object.size, "object");
    read(o, "height", c.object.height, "object");
    read(o, "sides", c.object.sides, "object");
    read(o, "scale", c.object.scale, "object");
    read(o, "subdivision", c.object.subdivision, "object");
    if (o.contains("pose")) {
      const json& p = o["pose"];
      check_keys(p, "object.pose", {"x", "y", "theta"});
      read(p, "x", c.object.x, "object.pose");
      read(p, "theta", c.object.theta, "object.pose");
      if (p.contains("y") && !p["y"].is_null()) c.object.y = p["y"].get<double>();
    }
    if (o.contains("material")) c.object.material = read_material(o["material"], c.object.material, "object.material");
    if (c.object.subdivision < 0 || c.object.subdivision > 6) throw InputError("object.subdivision must be in [0, 6]");
    if (!(c.object.scale > 0.0)) throw InputError("object.scale must be > 0");
  }

  if (j.contains("jaw")) {
    const json& w = j["jaw"];
    check_keys(w, "jaw", {"profile", "pad_material", "max_width", "closing_speed", "lift_speed", "pad_thickness",
                          "pad_height", "rounded_sagitta", "backing_thickness", "max_edge"});
    if (w.contains("profile")) c.jaw.profile = parse_jaw_profile(w["profile"].get<std::string>());
    if (w.contains("pad_material")) c.jaw.pad_material = read_material(w["pad_material"], c.jaw.pad_material, "jaw.pad_material");
    read(w, "max_width", c.jaw.max_width, "jaw");
    read(w, "closing_speed", c.jaw.closing_speed, "jaw");
    read(w, "lift_speed", c.jaw.lift_speed, "jaw");
    read(w, "pad_thickness", c.jaw.pad_thickness, "jaw");
    read(w, "pad_height", c.jaw.pad_height, "jaw");
    read(w, "rounded_sagitta", c.jaw.rounded_sagitta, "jaw");
    read(w, "backing_thickness", c.jaw.backing_thickness, "jaw");
    read(w, "max_edge", c.jaw.max_edge, "jaw");
    if (!(c.jaw.closing_speed > 0.0) || !(c.jaw.lift_speed > 0.0)) throw InputError("jaw speeds must be > 0");
    if (!(c.jaw.max_width > 0.0)) throw InputError("jaw.max_width must be > 0");
    if (!(c.jaw.max_edge > 0.0) || !(c.jaw.pad_thickness > 0.0) || !(c.jaw.pad_height > 0.0)) {
      throw InputError("jaw pad dimensions must be > 0");
    }
    if (!(c.jaw.rounded_sagitta >= 0.0 && c.jaw.rounded_sagitta < c.jaw.pad_thickness)) {
      throw InputError("jaw.rounded_sagitta must be in [0, pad_thickness)");
    }
  }

  if (j.contains("physics")) {
    const json& p = j["physics"];
    check_keys(p, "physics", {"gravity", "dhat", "kappa", "timestep", "tolerances", "eps_v", "psi_threshold",
                              "psi_unit", "psi_balance", "contact_eps", "lift_clearance", "settle_time",
                              "ground_half_width", "ground_depth"});
    if (p.contains("gravity")) c.physics.gravity = read_vec2(p["gravity"], "physics.gravity");
    read(p, "dhat", c.physics.dhat, "physics");
    read(p, "kappa", c.physics.kappa, "physics");
    read(p, "timestep", c.physics.timestep, "physics");
    read(p, "eps_v", c.physics.eps_v, "physics");
    read(p, "psi_threshold", c.physics.psi_threshold, "physics");
    read(p, "psi_unit", c.physics.psi_unit, "physics");
    read(p, "psi_balance", c.physics.psi_balance, "physics");
    read(p, "lift_clearance", c.physics.lift_clearance, "physics");
    read(p, "settle_time", c.physics.settle_time, "physics");
    read(p, "ground_half_width", c.physics.ground_half_width, "physics");
    read(p, "ground_depth", c.physics.ground_depth, "physics");
    if (p.contains("contact_eps") && !p["contact_eps"].is_null()) c.physics.contact_eps = p["contact_eps"].get<double>();
    if (p.contains("tolerances")) {
      const json& t = p["tolerances"];
      check_keys(t, "physics.tolerances", {"newton", "max_newton_iters"});
      read(t, "newton", c.physics.newton_tol, "physics.tolerances");
      read(t, "max_newton_iters", c.physics.max_newton_iters, "physics.tolerances");
    }
    if (!(c.physics.dhat > 0.0) || !(c.physics.kappa > 0.0)) throw InputError("physics.dhat and kappa must be > 0");
    if (!(c.physics.timestep > 0.0)) throw InputError("physics.timestep must be > 0");
    if (!(c.physics.newton_tol > 0.0) || c.physics.max_newton_iters < 1) {
      throw InputError("physics.tolerances: newton must be > 0 and max_newton_iters >= 1");
    }
    if (!(c.physics.eps_v > 0.0)) throw InputError("physics.eps_v must be > 0");
    if (!(c.physics.psi_threshold >= 0.0) || !(c.physics.psi_unit > 0.0)) {
      throw InputError("physics.psi_threshold must be >= 0 and psi_unit > 0");
    }
  }

  if (j.contains("perturbation")) {
    const json& p = j["perturbation"];
    check_keys(p, "perturbation", {"translation_std", "rotation_std"});
    read(p, "translation_std", c.perturbation.translation_std, "perturbation");
    read(p, "rotation_std", c.perturbation.rotation_std, "perturbation");
    if (!(c.perturbation.translation_std >= 0.0) || !(c.perturbation.rotation_std >= 0.0)) {
      throw InputError("perturbation stds must be >= 0");
    }
  }

  if (j.contains("analytic")) {
    const json& a = j["analytic"];
    check_keys(a, "analytic", {"max_normal_force", "torsion_ratio"});
    read(a, "max_normal_force", c.analytic.max_normal_force, "analytic");
    read(a, "torsion_ratio", c.analytic.torsion_ratio, "analytic");
    if (!(c.analytic.max_normal_force > 0.0) || !(c.analytic.torsion_ratio >= 0.0)) {
      throw InputError("analytic: max_normal_force must be > 0 and torsion_ratio >= 0");
    }
  }

  if (j.contains("grasp")) {
    const json& g = j["grasp"];
    check_keys(g, "grasp", {"center", "angle"});
    if (g.contains("center")) c.grasp_center = read_vec2(g["center"], "grasp.center");
    read(g, "angle", c.grasp_angle, "grasp");
  }

  read(j, "seed", c.seed, "config");
  return c;
}

json config_to_json(const ScenarioConfig& c) {
  json pose = {{"x", c.object.x}, {"theta", c.object.theta}};
  pose["y"] = c.object.y ? json(*c.object.y) : json(nullptr);
  json physics = {{"gravity", {c.physics.gravity.x(), c.physics.gravity.y()}},
                  {"dhat", c.physics.dhat},
                  {"kappa", c.physics.kappa},
                  {"timestep", c.physics.timestep},
                  {"tolerances", {{"newton", c.physics.newton_tol}, {"max_newton_iters", c.physics.max_newton_iters}}},
                  {"eps_v", c.physics.eps_v},
                  {"psi_threshold", c.physics.psi_threshold},
                  {"psi_unit", c.physics.psi_unit},
                  {"psi_balance", c.physics.psi_balance},
                  {"lift_clearance", c.physics.lift_clearance},
                  {"settle_time", c.physics.settle_time},
                  {"ground_half_width", c.physics.ground_half_width},
                  {"ground_depth", c.physics.ground_depth}};
  physics["contact_eps"] = c.physics.contact_eps ? json(*c.physics.contact_eps) : json(nullptr);
  return {
      {"object",
       {{"primitive", c.object.primitive},
        {"polygon_file", c.object.polygon_file},
        {"size", c.object.size},
        {"height", c.object.height},
        {"sides", c.object.sides},
        {"scale", c.object.scale},
        {"pose", pose},
        {"subdivision", c.object.subdivision},
        {"material", material_json(c.object.material)}}},
      {"jaw",
       {{"profile", to_string(c.jaw.profile)},
        {"pad_material", material_json(c.jaw.pad_material)},
        {"max_width", c.jaw.max_width},
        {"closing_speed", c.jaw.closing_speed},
        {"lift_speed", c.jaw.lift_speed},
        {"pad_thickness", c.jaw.pad_thickness},
        {"pad_height", c.jaw.pad_height},
        {"rounded_sagitta", c.jaw.rounded_sagitta},
        {"backing_thickness", c.jaw.backing_thickness},
        {"max_edge", c.jaw.max_edge}}},
      {"physics", physics},
      {"perturbation",
       {{"translation_std", c.perturbation.translation_std}, {"rotation_std", c.perturbation.rotation_std}}},
      {"analytic",
       {{"max_normal_force", c.analytic.max_normal_force}, {"torsion_ratio", c.analytic.torsion_ratio}}},
      {"grasp", {{"center", {c.grasp_center.x(), c.grasp_center.y()}}, {"angle", c.grasp_angle}}},
      {"seed", c.seed}};
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

}  // namespace graspsim
