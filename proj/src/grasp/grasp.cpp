#include "graspsim/grasp.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

namespace graspsim {

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::Squeeze: return "squeeze";
    case Phase::Lift: return "lift";
    case Phase::Done: return "done";
  }
  return "?";
}

std::string to_string(SqueezeExit exit) {
  switch (exit) {
    case SqueezeExit::Threshold: return "threshold";
    case SqueezeExit::MinSeparation: return "min_separation";
    case SqueezeExit::Budget: return "budget";
    case SqueezeExit::Blocked: return "blocked";
  }
  return "?";
}

GraspSpec perturb_grasp(const GraspSpec& u, const PerturbationModel& model, std::mt19937_64& rng) {
  if (model.translation_std < 0.0 || model.rotation_std < 0.0) throw InputError("perturbation stds must be >= 0");
  std::normal_distribution<double> z(0.0, 1.0);
  GraspSpec out = u;
  const double dx = z(rng), dy = z(rng), da = z(rng);
  out.center.x() += model.translation_std * dx;
  out.center.y() += model.translation_std * dy;
  out.axis_angle += model.rotation_std * da;
  return out;
}

bool squeeze_termination(double psi1, double psi2, double psi_th, double balance) {
  if (psi1 < psi_th || psi2 < psi_th) return false;
  return std::abs(psi1 - psi2) <= balance * std::max(psi1, psi2);
}

bool evaluate_success(const Scene& scene, std::span<const Vec2> x, double contact_eps) {
  const int obj = scene.object_index();
  const bool jaw1 = body_min_distance(scene, x, scene.pad_index(0), obj) <= contact_eps;
  const bool jaw2 = body_min_distance(scene, x, scene.pad_index(1), obj) <= contact_eps;
  const bool ground = body_min_distance(scene, x, obj, scene.ground_index()) <= contact_eps;
  return jaw1 && jaw2 && !ground;
}

Pose2 object_pose(const Scene& scene, std::span<const Vec2> x) {
  const int obj = scene.object_index();
  const auto& rest = scene.body(obj).mesh.rest_positions;
  const auto cur = scene.body_positions(x, obj);
  const auto masses = lumped_masses(scene.body(obj));
  Vec2 c0 = Vec2::Zero(), c1 = Vec2::Zero();
  double m = 0.0;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    c0 += masses[i] * rest[i];
    c1 += masses[i] * cur[i];
    m += masses[i];
  }
  c0 /= m;
  c1 /= m;
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    const Vec2 r = rest[i] - c0, q = cur[i] - c1;
    s += masses[i] * cross2(r, q);
    c += masses[i] * r.dot(q);
  }
  return {c1, std::atan2(s, c)};
}

double pad_compression(const Scene& scene, std::span<const Vec2> x) {
  double min_ratio = 1.0;
  for (int jaw = 0; jaw < 2; ++jaw) {
    const int b = scene.pad_index(jaw);
    const Body& pad = scene.body(b);
    const auto cur = scene.body_positions(x, b);
    for (const auto& [back, front] : pad.thickness_pairs) {
      const double rest =
          (pad.mesh.rest_positions[static_cast<std::size_t>(back)] - pad.mesh.rest_positions[static_cast<std::size_t>(front)]).norm();
      const double now = (cur[static_cast<std::size_t>(back)] - cur[static_cast<std::size_t>(front)]).norm();
      min_ratio = std::min(min_ratio, now / rest);
    }
  }
  return 1.0 - min_ratio;
}

namespace {

class GraspRun {
 public:
  GraspRun(const ScenarioConfig& config, const GraspSpec& grasp, const RunOptions& options, Scene scene)
      : config_(config),
        grasp_(grasp),
        options_(options),
        scene_(std::move(scene)),
        model_(scene_),
        params_(StepParams::from(config.physics)),
        state_(SimState::at_rest(scene_, config.physics.kappa)) {
    params_.record_path = options.record_step_paths;
    const auto scripted = scene_.scripted_mask();
    jaw_of_vertex_.assign(scripted.size(), -1);
    for (int b = 0; b < scene_.body_count(); ++b) {
      const Body& body = scene_.body(b);
      if (body.jaw < 0) continue;
      const int off = scene_.vertex_offset(b);
      for (std::size_t v = 0; v < body.scripted.size(); ++v)
        if (body.scripted[v]) jaw_of_vertex_[static_cast<std::size_t>(off) + v] = body.jaw;
    }
    if (options_.record_trajectory) trajectory_ = std::make_shared<Trajectory>();
  }

  GraspOutcome run() {
    GraspOutcome out;
    out.grasp = grasp_;
    min_jacobian_ = model_.min_jacobian(state_.positions);
    record(Phase::Squeeze);

    const double h = params_.h;
    const double dhat = config_.physics.dhat;
    const Vec2 axis = grasp_.axis();
    const double travel = grasp_.closing_speed * h;
    int budget = options_.max_squeeze_steps;
    if (budget <= 0) budget = static_cast<int>(std::ceil(0.5 * grasp_.max_width / travel)) + 10;

    const int pad0 = scene_.pad_index(0), pad1 = scene_.pad_index(1);
    double separation = grasp_.max_width;
    bool terminated = false;
    out.squeeze_exit = SqueezeExit::Budget;
    for (int k = 0; k < budget; ++k) {
      if (separation - 2.0 * travel < 2.0 * dhat ||
          body_min_distance(scene_, state_.positions, pad0, pad1) <= 2.0 * dhat) {
        out.squeeze_exit = SqueezeExit::MinSeparation;
        break;
      }
      if (!advance({travel * axis, -travel * axis}, Phase::Squeeze)) {
        out.squeeze_exit = SqueezeExit::Blocked;
        break;
      }
      separation -= 2.0 * travel;
      out.max_pad_compression = std::max(out.max_pad_compression, pad_compression(scene_, state_.positions));
      out.psi1 = pad_energy(0);
      out.psi2 = pad_energy(1);
      const double unit = config_.physics.psi_unit;
      if (squeeze_termination(out.psi1 / unit, out.psi2 / unit, config_.physics.psi_threshold,
                              config_.physics.psi_balance)) {
        terminated = true;
        out.squeeze_exit = SqueezeExit::Threshold;
        break;
      }
    }
    out.psi1 = pad_energy(0);
    out.psi2 = pad_energy(1);

    if (terminated && !options_.squeeze_only) {
      out.phase_reached = Phase::Lift;
      const int obj = scene_.object_index();
      double lowest = std::numeric_limits<double>::infinity();
      for (const auto& p : scene_.body_positions(state_.positions, obj)) lowest = std::min(lowest, p.y());
      const double lift = std::max(0.0, config_.physics.lift_clearance - lowest);
      const double rise = grasp_.lift_speed * h;
      const int lift_steps = static_cast<int>(std::ceil(lift / rise));
      bool moving = true;
      for (int k = 0; k < lift_steps && moving; ++k) moving = advance({Vec2(0.0, rise), Vec2(0.0, rise)}, Phase::Lift);
      const int settle_steps = static_cast<int>(std::lround(config_.physics.settle_time / h));
      for (int k = 0; k < settle_steps && moving; ++k) moving = advance({Vec2::Zero(), Vec2::Zero()}, Phase::Lift);
      if (moving) out.phase_reached = Phase::Done;
      else out.message = "jaws blocked during lift";
    }

    const double eps = config_.physics.effective_contact_eps();
    const auto& x = state_.positions;
    const int obj = scene_.object_index();
    out.jaw1_contact = body_min_distance(scene_, x, pad0, obj) <= eps;
    out.jaw2_contact = body_min_distance(scene_, x, pad1, obj) <= eps;
    out.ground_contact = body_min_distance(scene_, x, obj, scene_.ground_index()) <= eps;
    if (terminated && options_.squeeze_only) out.phase_reached = Phase::Lift;
    out.success = out.phase_reached == Phase::Done && out.jaw1_contact && out.jaw2_contact && !out.ground_contact;
    out.final_object_pose = object_pose(scene_, x);
    out.steps = steps_;
    out.newton_iterations = newton_iterations_;
    out.min_jacobian = min_jacobian_;
    out.trajectory = trajectory_;
    return out;
  }

 private:
  double pad_energy(int jaw) const {
    const int b = scene_.pad_index(jaw);
    return model_.elastic(b)->energy(scene_.body_positions(state_.positions, b));
  }

  // Returns false when the jaws cannot reach their targets; the state is unchanged.
  bool advance(const std::array<Vec2, 2>& jaw_motion, Phase phase) {
    state_.scripted_targets = state_.positions;
    for (std::size_t i = 0; i < jaw_of_vertex_.size(); ++i) {
      const int j = jaw_of_vertex_[i];
      if (j >= 0) state_.scripted_targets[i] += jaw_motion[static_cast<std::size_t>(j)];
    }
    StepStats stats;
    try {
      state_ = step(state_, model_, params_, &stats);
    } catch (const ScriptedMotionBlocked&) {
      state_.scripted_targets = state_.positions;
      return false;
    }
    ++steps_;
    newton_iterations_ += stats.newton_iterations;
    min_jacobian_ = std::min(min_jacobian_, model_.min_jacobian(state_.positions));
    record(phase, &stats);
    return true;
  }

  void record(Phase phase, const StepStats* stats = nullptr) {
    if (trajectory_) {
      trajectory_->times.push_back(state_.time);
      trajectory_->frames.push_back(state_.positions);
    }
    if (options_.observer) options_.observer(scene_, model_, state_, phase, stats);
  }

  const ScenarioConfig& config_;
  GraspSpec grasp_;
  const RunOptions& options_;
  Scene scene_;
  SimModel model_;
  StepParams params_;
  SimState state_;
  std::vector<int> jaw_of_vertex_;
  std::shared_ptr<Trajectory> trajectory_;
  int steps_ = 0;
  int newton_iterations_ = 0;
  double min_jacobian_ = 0.0;
};

}  // namespace

GraspOutcome run_grasp(const ScenarioConfig& config, const GraspSpec& grasp, const RunOptions& options) {
  if (!(grasp.closing_speed > 0.0) || !(grasp.lift_speed > 0.0)) throw InputError("grasp speeds must be positive");
  Scene scene;
  try {
    scene = build_scene(config, grasp);
  } catch (const GeometryError& e) {
    GraspOutcome out;
    out.grasp = grasp;
    out.placement_infeasible = true;
    out.message = e.what();
    return out;
  }
  try {
    GraspRun run(config, grasp, options, std::move(scene));
    return run.run();
  } catch (const SolverError& e) {
    GraspOutcome out;
    out.grasp = grasp;
    out.valid = false;
    out.message = std::string(e.what()) + (e.diagnostics().empty() ? "" : " [" + e.diagnostics() + "]");
    return out;
  }
}

std::uint64_t trial_seed(std::uint64_t seed, int attempt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(attempt)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

RobustnessEstimate estimate_robustness(const ScenarioConfig& config, const GraspSpec& grasp, int N,
                                       std::uint64_t seed, const RobustnessOptions& options) {
  if (N < 1) throw InputError("trial count must be at least 1");
  const int workers = options.workers > 0 ? options.workers
                                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto attempt = [&](int index) {
    std::mt19937_64 rng(trial_seed(seed, index));
    return run_grasp(config, perturb_grasp(grasp, config.perturbation, rng), options.run);
  };

  RobustnessEstimate est;
  est.N = N;
  est.seed = seed;
  int next = 0;
  while (static_cast<int>(est.trials.size()) < N) {
    const int want = N - static_cast<int>(est.trials.size());
    if (static_cast<int>(est.invalid.size()) > N || next + want > 2 * N) {
      throw SolverError("too many invalid trials: " + std::to_string(est.invalid.size()) + " of " +
                        std::to_string(next) + " attempts");
    }
    std::vector<GraspOutcome> batch(static_cast<std::size_t>(want));
    if (workers <= 1 || want == 1) {
      for (int i = 0; i < want; ++i) batch[static_cast<std::size_t>(i)] = attempt(next + i);
    } else {
      for (int start = 0; start < want; start += workers) {
        std::vector<std::future<GraspOutcome>> running;
        for (int i = start; i < std::min(want, start + workers); ++i)
          running.push_back(std::async(std::launch::async, attempt, next + i));
        for (std::size_t i = 0; i < running.size(); ++i)
          batch[static_cast<std::size_t>(start) + i] = running[i].get();
      }
    }
    next += want;
    for (auto& o : batch) (o.valid ? est.trials : est.invalid).push_back(std::move(o));
  }
  if (static_cast<int>(est.invalid.size()) > N) throw SolverError("too many invalid trials");
  int successes = 0;
  for (const auto& t : est.trials) successes += t.success ? 1 : 0;
  est.R = static_cast<double>(successes) / N;
  return est;
}

}  // namespace graspsim
