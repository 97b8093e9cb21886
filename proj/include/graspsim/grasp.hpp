#pragma once
// Grasp state machine (squeeze, lift, evaluate), pose perturbation and
// Monte-Carlo robustness.

#include "graspsim/common.hpp"
#include "graspsim/config.hpp"
#include "graspsim/grasp_spec.hpp"
#include "graspsim/scene.hpp"
#include "graspsim/stepper.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace graspsim {

enum class Phase { Squeeze, Lift, Done };
std::string to_string(Phase phase);

enum class SqueezeExit { Threshold, MinSeparation, Budget, Blocked };
std::string to_string(SqueezeExit exit);

struct Pose2 {
  Vec2 position = Vec2::Zero();
  double angle = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Positions> frames;
};

struct GraspOutcome {
  bool success = false;
  bool valid = true;  // false: solver failure, excluded from robustness
  bool placement_infeasible = false;
  Phase phase_reached = Phase::Squeeze;
  SqueezeExit squeeze_exit = SqueezeExit::Budget;
  GraspSpec grasp;
  Pose2 final_object_pose;
  double psi1 = 0.0, psi2 = 0.0;  // pad strain energies at squeeze end (J per metre)
  bool jaw1_contact = false, jaw2_contact = false, ground_contact = false;
  double max_pad_compression = 0.0;
  int steps = 0;
  int newton_iterations = 0;
  double min_jacobian = 0.0;
  std::string message;  // placement or solver diagnostics
  std::shared_ptr<const Trajectory> trajectory;
};

/// Called after every accepted frame (including the initial one, where the
/// step statistics are null).
using FrameObserver =
    std::function<void(const Scene&, const SimModel&, const SimState&, Phase, const StepStats*)>;

struct RunOptions {
  bool record_trajectory = false;
  int max_squeeze_steps = 0;  // 0: enough to close the jaws fully
  bool squeeze_only = false;  // stop after the squeeze phase
  FrameObserver observer;
  bool record_step_paths = false;  // StepStats::path for the observer
};

/// Center offset by N(0, translation_std^2) per coordinate, angle by
/// N(0, rotation_std^2); other fields unchanged.
GraspSpec perturb_grasp(const GraspSpec& u, const PerturbationModel& model, std::mt19937_64& rng);

/// Both pads at or above the threshold and within `balance` of each other.
bool squeeze_termination(double psi1, double psi2, double psi_th, double balance = 0.1);

bool evaluate_success(const Scene& scene, std::span<const Vec2> positions, double contact_eps);

/// Best-fit rigid pose of the object relative to its rest shape.
Pose2 object_pose(const Scene& scene, std::span<const Vec2> positions);

/// 1 - min over both pads of (current / rest) thickness.
double pad_compression(const Scene& scene, std::span<const Vec2> positions);

/// Runs Initialize, Squeeze, Lift and Evaluate for one grasp.
GraspOutcome run_grasp(const ScenarioConfig& config, const GraspSpec& grasp, const RunOptions& options = {});

struct RobustnessEstimate {
  double R = 0.0;
  int N = 0;
  std::uint64_t seed = 0;
  std::vector<GraspOutcome> trials;   // valid trials in attempt order
  std::vector<GraspOutcome> invalid;  // excluded attempts
};

struct RobustnessOptions {
  int workers = 0;  // 0: hardware concurrency
  RunOptions run;
};

/// Deterministic per-attempt seed.
std::uint64_t trial_seed(std::uint64_t seed, int attempt);

/// N perturbed trials; invalid attempts are redrawn (at most 2N attempts).
/// Throws SolverError if more than N attempts are invalid.
RobustnessEstimate estimate_robustness(const ScenarioConfig& config, const GraspSpec& grasp, int N,
                                       std::uint64_t seed, const RobustnessOptions& options = {});

}  // namespace graspsim
