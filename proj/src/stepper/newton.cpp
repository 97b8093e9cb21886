#include "graspsim/stepper.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>
#include <sstream>

namespace graspsim {

namespace {

struct LineSearchResult {
  double alpha;
  double energy;
};

LineSearchResult line_search(const Objective& objective, std::span<const Vec2> x, std::span<const Vec2> p,
                             double energy_at_x) {
  double alpha = std::min(1.0, objective.max_step(x, p));
  Positions trial(x.size());
  while (alpha >= 1e-14) {
    for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + alpha * p[i];
    const double e = objective.energy(trial);
    if (std::isfinite(e) && e < energy_at_x) return {alpha, e};
    alpha *= 0.5;
  }
  std::ostringstream msg;
  msg << "line search step underflow (E = " << energy_at_x << ")";
  throw SolverError(msg.str());
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

double filtered_line_search(const Objective& objective, std::span<const Vec2> x, std::span<const Vec2> p,
                            double energy_at_x) {
  return line_search(objective, x, p, energy_at_x).alpha;
}

NewtonResult newton_solve(const Objective& objective, Positions x0, std::span<const std::uint8_t> fixed,
                          const NewtonOptions& options) {
  const int n = static_cast<int>(x0.size());
  std::vector<int> dof(static_cast<std::size_t>(2 * n), -1);
  int free_dofs = 0;
  for (int v = 0; v < n; ++v) {
    if (!fixed.empty() && fixed[static_cast<std::size_t>(v)]) continue;
    dof[static_cast<std::size_t>(2 * v)] = free_dofs++;
    dof[static_cast<std::size_t>(2 * v + 1)] = free_dofs++;
  }

  NewtonResult result;
  result.x = std::move(x0);
  double energy = objective.energy(result.x);
  if (!std::isfinite(energy)) throw SolverError("initial Newton iterate is infeasible");
  result.energies.push_back(energy);
  if (free_dofs == 0) return result;

  Eigen::VectorXd gradient;
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<Eigen::Triplet<double>> reduced;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  Positions p(static_cast<std::size_t>(n), Vec2::Zero());
  double step_norm = std::numeric_limits<double>::infinity();

  for (int it = 0; it <= options.max_iterations; ++it) {
    gradient.setZero(2 * n);
    triplets.clear();
    objective.derivatives(result.x, gradient, triplets);

    reduced.clear();
    reduced.reserve(triplets.size());
    double max_diag = 0.0, max_entry = 0.0;
    for (const auto& t : triplets) {
      const int r = dof[static_cast<std::size_t>(t.row())], c = dof[static_cast<std::size_t>(t.col())];
      if (r < 0 || c < 0) continue;
      reduced.emplace_back(r, c, t.value());
    }
    Eigen::SparseMatrix<double> H(free_dofs, free_dofs);
    H.setFromTriplets(reduced.begin(), reduced.end());
    for (int k = 0; k < H.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator e(H, k); e; ++e) {
        max_entry = std::max(max_entry, std::abs(e.value()));
        if (e.row() == e.col()) max_diag = std::max(max_diag, e.value());
      }
    }
    Eigen::VectorXd g(free_dofs);
    for (int i = 0; i < 2 * n; ++i)
      if (dof[static_cast<std::size_t>(i)] >= 0) g[dof[static_cast<std::size_t>(i)]] = gradient[i];
    result.gradient_norm = inf_norm(g);
    result.hessian_norm = max_entry;

    Eigen::VectorXd dx;
    bool solved = false;
    for (int attempt = 0; attempt < 3 && !solved; ++attempt) {
      Eigen::SparseMatrix<double> A = H;
      if (attempt > 0) {
        const double shift = 1e-8 * std::max(max_diag, 1.0) * (attempt == 1 ? 1.0 : 100.0);
        for (int i = 0; i < free_dofs; ++i) A.coeffRef(i, i) += shift;
      }
      solver.compute(A);
      if (solver.info() != Eigen::Success) continue;
      dx = solver.solve(-g);
      solved = solver.info() == Eigen::Success && dx.allFinite() && g.dot(dx) <= 0.0;
    }
    if (!solved) throw SolverError("linear solve failed after regularization");

    for (int v = 0; v < n; ++v) {
      const int rx = dof[static_cast<std::size_t>(2 * v)];
      p[static_cast<std::size_t>(v)] = rx < 0 ? Vec2::Zero() : Vec2(dx[rx], dx[rx + 1]);
    }
    step_norm = inf_norm(dx);
    if (step_norm <= options.tolerance) return result;
    if (it == options.max_iterations) break;

    const LineSearchResult ls = line_search(objective, result.x, p, energy);
    for (int v = 0; v < n; ++v) result.x[static_cast<std::size_t>(v)] += ls.alpha * p[static_cast<std::size_t>(v)];
    energy = ls.energy;
    result.energies.push_back(energy);
    result.alphas.push_back(ls.alpha);
    result.iterations = it + 1;
    if (options.trace) options.trace->push_back(result.x);
  }
  std::ostringstream diag;
  diag << "iterations=" << result.iterations << " energy=" << energy << " |p|inf=" << step_norm
       << " |g|inf=" << result.gradient_norm << " tol=" << options.tolerance;
  throw SolverError("Newton did not converge within " + std::to_string(options.max_iterations) + " iterations",
                    diag.str());
}

}  // namespace graspsim
