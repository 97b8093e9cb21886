#pragma once
// Implicit Euler stepping by minimizing the incremental potential
//   E(x) = 1/2 (x - xhat)^T M (x - xhat) + h^2 (Psi(x) + B(x) + D(x))
// with projected Newton and a CCD-filtered backtracking line search.

#include "graspsim/common.hpp"
#include "graspsim/config.hpp"
#include "graspsim/contact.hpp"
#include "graspsim/elastic.hpp"
#include "graspsim/scene.hpp"

#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace graspsim {

struct StepParams {
  double h = 0.01;
  double newton_tol = 1e-3;
  int max_newton_iters = 200;
  double kappa = 1e5;
  double dhat = 1e-3;
  double eps_v = 1e-3;
  bool record_path = false;  // fill StepStats::path

  static StepParams from(const PhysicsConfig& physics);
  void validate() const;
};

struct SimState {
  Positions positions;
  Positions velocities;
  double time = 0.0;
  /// End-of-step positions for scripted vertices (same indexing as positions;
  /// entries of free vertices are ignored).
  Positions scripted_targets;
  /// Barrier stiffness in effect; doubled when contacts get too close.
  double kappa = 1e5;

  static SimState at_rest(const Scene& scene, double kappa);
};

/// Precomputed per-scene data shared by all steps of a simulation.
class SimModel {
 public:
  explicit SimModel(const Scene& scene);

  const Scene& scene() const { return *scene_; }
  const ContactTopology& topology() const { return topology_; }
  const std::vector<double>& masses() const { return masses_; }
  const std::vector<std::uint8_t>& scripted() const { return scripted_; }
  /// Elastic cache per body; null for fully scripted bodies.
  const ElasticBody* elastic(int body) const { return elastic_[static_cast<std::size_t>(body)].get(); }

  /// Sum of strain energies of all simulated bodies (+infinity if any inverted).
  double strain_energy(std::span<const Vec2> x) const;
  /// Smallest element det F over simulated bodies.
  double min_jacobian(std::span<const Vec2> x) const;

 private:
  const Scene* scene_;
  ContactTopology topology_;
  std::vector<double> masses_;
  std::vector<std::uint8_t> scripted_;
  std::vector<std::shared_ptr<const ElasticBody>> elastic_;
};

/// Objective for newton_solve. Positions are full vertex arrays; fixed vertices
/// never move.
class Objective {
 public:
  virtual ~Objective() = default;
  /// +infinity for infeasible states (inversion, contact).
  virtual double energy(std::span<const Vec2> x) const = 0;
  /// Gradient (2n) and PSD Hessian triplets (global indexing).
  virtual void derivatives(std::span<const Vec2> x, Eigen::VectorXd& gradient,
                           std::vector<Eigen::Triplet<double>>& hessian) const = 0;
  /// Largest collision-free fraction of `direction`.
  virtual double max_step(std::span<const Vec2> /*x*/, std::span<const Vec2> /*direction*/) const { return 1.0; }
};

struct NewtonOptions {
  double tolerance = 1e-8;  // absolute, on ||p||_inf (m)
  int max_iterations = 200;
  double length_scale = 1.0;
  std::vector<Positions>* trace = nullptr;  // receives every accepted iterate after x0
};

struct NewtonResult {
  Positions x;
  int iterations = 0;
  std::vector<double> energies;  // E at each iterate, starting with x0
  std::vector<double> alphas;
  double gradient_norm = 0.0;  // ||g_free||_inf at the returned iterate
  double hessian_norm = 0.0;   // max |H_ij| at the returned iterate
};

NewtonResult newton_solve(const Objective& objective, Positions x0, std::span<const std::uint8_t> fixed,
                          const NewtonOptions& options);

/// Step length along p: starts at min(1, max_step), halves until the energy
/// strictly decreases. Throws SolverError once alpha drops below 1e-14.
double filtered_line_search(const Objective& objective, std::span<const Vec2> x, std::span<const Vec2> p,
                            double energy_at_x);

/// The incremental potential of one time step.
class IncrementalPotential : public Objective {
 public:
  IncrementalPotential(const SimModel& model, const StepParams& params, double kappa, Positions x_hat,
                       Positions x_prev);

  /// Multiplies the inertia of scripted vertices by (1 + weight), turning
  /// their targets into a stiff penalty when they are left free.
  void set_scripted_penalty(double weight) { scripted_penalty_ = weight; }

  double energy(std::span<const Vec2> x) const override;
  void derivatives(std::span<const Vec2> x, Eigen::VectorXd& gradient,
                   std::vector<Eigen::Triplet<double>>& hessian) const override;
  double max_step(std::span<const Vec2> x, std::span<const Vec2> direction) const override;

  const std::vector<FrictionDatum>& friction() const { return friction_; }

 private:
  const SimModel& model_;
  StepParams params_;
  double kappa_;
  Positions x_hat_;
  Positions x_prev_;
  std::vector<FrictionDatum> friction_;
  double scripted_penalty_ = 0.0;

  double inertia_weight(std::size_t vertex) const;
};

struct StepStats {
  int newton_iterations = 0;
  std::vector<double> energies;
  std::vector<double> alphas;
  double gradient_norm = 0.0;
  double hessian_norm = 0.0;
  double min_distance = 0.0;  // over active candidates, infinity if none within dhat
  double kappa = 0.0;         // stiffness used for this step
  int penalty_rounds = 0;     // penalty solves needed to reach scripted targets
  /// With StepParams::record_path: every configuration the solver moved through,
  /// from the start state to the result. Consecutive entries are joined by the
  /// straight, CCD-checked moves the solver made.
  std::vector<Positions> path;
};

SimState step(const SimState& state, const SimModel& model, const StepParams& params, StepStats* stats = nullptr);
SimState step(const SimState& state, const Scene& scene, const StepParams& params);

}  // namespace graspsim
