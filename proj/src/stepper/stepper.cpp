#include "graspsim/stepper.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace graspsim {

StepParams StepParams::from(const PhysicsConfig& physics) {
  StepParams p;
  p.h = physics.timestep;
  p.newton_tol = physics.newton_tol;
  p.max_newton_iters = physics.max_newton_iters;
  p.kappa = physics.kappa;
  p.dhat = physics.dhat;
  p.eps_v = physics.eps_v;
  return p;
}

void StepParams::validate() const {
  if (!(h > 0.0)) throw InputError("time step must be positive");
  if (!(newton_tol > 0.0)) throw InputError("newton tolerance must be positive");
  if (max_newton_iters < 1) throw InputError("max_newton_iters must be at least 1");
  if (!(kappa > 0.0) || !(dhat > 0.0) || !(eps_v > 0.0)) throw InputError("kappa, dhat and eps_v must be positive");
}

SimState SimState::at_rest(const Scene& scene, double kappa) {
  SimState s;
  s.positions = scene.positions();
  s.velocities.assign(s.positions.size(), Vec2::Zero());
  s.scripted_targets = s.positions;
  s.kappa = kappa;
  return s;
}

SimModel::SimModel(const Scene& scene)
    : scene_(&scene), topology_(scene), masses_(lumped_masses(scene)), scripted_(scene.scripted_mask()) {
  elastic_.resize(static_cast<std::size_t>(scene.body_count()));
  for (int b = 0; b < scene.body_count(); ++b) {
    if (scene.body(b).fully_scripted()) continue;
    elastic_[static_cast<std::size_t>(b)] = std::make_shared<const ElasticBody>(scene.body(b));
  }
}

double SimModel::strain_energy(std::span<const Vec2> x) const {
  double total = 0.0;
  for (int b = 0; b < scene_->body_count(); ++b) {
    const ElasticBody* eb = elastic(b);
    if (!eb) continue;
    const double e = eb->energy(scene_->body_positions(x, b));
    if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
    total += e;
  }
  return total;
}

double SimModel::min_jacobian(std::span<const Vec2> x) const {
  double m = std::numeric_limits<double>::infinity();
  for (int b = 0; b < scene_->body_count(); ++b) {
    const ElasticBody* eb = elastic(b);
    if (eb) m = std::min(m, eb->min_det(scene_->body_positions(x, b)));
  }
  return m;
}

IncrementalPotential::IncrementalPotential(const SimModel& model, const StepParams& params, double kappa,
                                           Positions x_hat, Positions x_prev)
    : model_(model), params_(params), kappa_(kappa), x_hat_(std::move(x_hat)), x_prev_(std::move(x_prev)) {
  const auto pairs = active_pairs(model_.topology(), x_prev_, params_.dhat);
  friction_ = lag_friction(model_.topology(), x_prev_, pairs, kappa_);
}

double IncrementalPotential::inertia_weight(std::size_t i) const {
  const double m = model_.masses()[i];
  return model_.scripted()[i] ? m * (1.0 + scripted_penalty_) : m;
}

double IncrementalPotential::energy(std::span<const Vec2> x) const {
  const double h2 = params_.h * params_.h;
  const double psi = model_.strain_energy(x);
  if (!std::isfinite(psi)) return psi;
  const auto pairs = active_pairs(model_.topology(), x, params_.dhat);
  const double b = contact_energy_grad_hess(model_.topology(), x, pairs, kappa_, false).energy;
  if (!std::isfinite(b)) return b;
  const double d = friction_energy_grad_hess(x, x_prev_, friction_, params_.eps_v, params_.h, false).energy;
  double inertia = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) inertia += 0.5 * inertia_weight(i) * (x[i] - x_hat_[i]).squaredNorm();
  return inertia + h2 * (psi + b + d);
}

void IncrementalPotential::derivatives(std::span<const Vec2> x, Eigen::VectorXd& gradient,
                                       std::vector<Eigen::Triplet<double>>& hessian) const {
  const double h2 = params_.h * params_.h;
  const Scene& scene = model_.scene();
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * n);
  std::vector<Eigen::Triplet<double>> h;
  for (int b = 0; b < scene.body_count(); ++b) {
    const ElasticBody* eb = model_.elastic(b);
    if (!eb) continue;
    const int off = scene.vertex_offset(b);
    eb->add_gradient(scene.body_positions(x, b), g, off);
    eb->add_hessian(scene.body_positions(x, b), h, off, true);
  }
  const auto pairs = active_pairs(model_.topology(), x, params_.dhat);
  const EnergyGradHess contact = contact_energy_grad_hess(model_.topology(), x, pairs, kappa_, true);
  if (!std::isfinite(contact.energy)) throw SolverError("derivatives requested at a contact-infeasible state");
  const EnergyGradHess friction = friction_energy_grad_hess(x, x_prev_, friction_, params_.eps_v, params_.h, true);
  g += contact.gradient + friction.gradient;

  gradient.resize(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const Vec2 r = inertia_weight(k) * (x[k] - x_hat_[k]);
    gradient.segment<2>(2 * i) = r + h2 * g.segment<2>(2 * i);
  }
  hessian.reserve(hessian.size() + h.size() + contact.hessian.size() + friction.hessian.size() + 2 * x.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = inertia_weight(static_cast<std::size_t>(i));
    hessian.emplace_back(2 * i, 2 * i, w);
    hessian.emplace_back(2 * i + 1, 2 * i + 1, w);
  }
  using TripletList = std::vector<Eigen::Triplet<double>>;
  for (const TripletList* list : {static_cast<const TripletList*>(&h), &contact.hessian, &friction.hessian})
    for (const auto& t : *list) hessian.emplace_back(t.row(), t.col(), h2 * t.value());
}

double IncrementalPotential::max_step(std::span<const Vec2> x, std::span<const Vec2> direction) const {
  return ccd_max_step(model_.topology(), x, direction);
}

SimState step(const SimState& state, const SimModel& model, const StepParams& params, StepStats* stats) {
  params.validate();
  const Scene& scene = model.scene();
  const std::size_t n = state.positions.size();
  if (n != static_cast<std::size_t>(scene.vertex_count()) || state.velocities.size() != n ||
      state.scripted_targets.size() != n) {
    throw InputError("state size does not match the scene");
  }
  const auto& scripted = model.scripted();
  const double h = params.h;
  const Vec2 g = scene.gravity();

  Positions x_hat(n), x0 = state.positions, scripted_move(n, Vec2::Zero());
  for (std::size_t i = 0; i < n; ++i) {
    if (scripted[i]) {
      x_hat[i] = state.scripted_targets[i];
      x0[i] = state.scripted_targets[i];
      scripted_move[i] = state.scripted_targets[i] - state.positions[i];
    } else {
      x_hat[i] = state.positions[i] + h * state.velocities[i] + h * h * g;
    }
  }
  IncrementalPotential potential(model, params, state.kappa, std::move(x_hat), state.positions);
  NewtonOptions options;
  options.length_scale = scene.length_scale();
  options.tolerance = params.newton_tol * h * options.length_scale;
  options.max_iterations = params.max_newton_iters;

  std::vector<Positions> path;
  if (params.record_path) {
    path.push_back(state.positions);
    options.trace = &path;
  }

  int penalty_rounds = 0;
  const bool direct = ccd_max_step(model.topology(), state.positions, scripted_move) >= 1.0 && model.min_jacobian(x0) > 0.0;
  if (!direct) {
    // Reach the targets from the feasible start through a stiff penalty, then snap.
    Positions x = state.positions;
    double max_move = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_move = std::max(max_move, scripted_move[i].norm());
    bool snapped = false;
    for (double weight = 1e6; weight <= 1e14 && !snapped; weight *= 100.0) {
      ++penalty_rounds;
      potential.set_scripted_penalty(weight);
      x = newton_solve(potential, std::move(x), {}, options).x;
      Positions snap(n, Vec2::Zero()), candidate = x;
      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!scripted[i]) continue;
        snap[i] = state.scripted_targets[i] - x[i];
        candidate[i] = state.scripted_targets[i];
        err = std::max(err, snap[i].norm());
      }
      if (err > 1e-2 * max_move + 1e-12) continue;
      if (ccd_max_step(model.topology(), x, snap) >= 1.0 && model.min_jacobian(candidate) > 0.0 &&
          std::isfinite(potential.energy(candidate))) {
        x0 = std::move(candidate);
        snapped = true;
        if (params.record_path) path.push_back(x0);
      }
    }
    potential.set_scripted_penalty(0.0);
    if (!snapped) throw ScriptedMotionBlocked("scripted vertices cannot reach their targets");
  } else if (params.record_path) {
    path.push_back(x0);
  }
  NewtonResult result = newton_solve(potential, std::move(x0), scripted, options);

  SimState next;
  next.velocities.resize(n);
  for (std::size_t i = 0; i < n; ++i) next.velocities[i] = (result.x[i] - state.positions[i]) / h;
  next.positions = std::move(result.x);
  next.time = state.time + h;
  next.scripted_targets = next.positions;
  const double min_d = min_pair_distance(model.topology(), next.positions, params.dhat);
  next.kappa = min_d < 1e-4 * params.dhat ? 2.0 * state.kappa : state.kappa;

  if (stats) {
    stats->newton_iterations = result.iterations;
    stats->energies = std::move(result.energies);
    stats->alphas = std::move(result.alphas);
    stats->gradient_norm = result.gradient_norm;
    stats->hessian_norm = result.hessian_norm;
    stats->min_distance = min_d;
    stats->kappa = state.kappa;
    stats->penalty_rounds = penalty_rounds;
    stats->path = std::move(path);
  }
  return next;
}

SimState step(const SimState& state, const Scene& scene, const StepParams& params) {
  const SimModel model(scene);
  return step(state, model, params);
}

}  // namespace graspsim
