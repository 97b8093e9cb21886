#include "graspsim/harness.hpp"

#include <chrono>
#include <ostream>

namespace graspsim {

BatchMode parse_batch_mode(const std::string& name) {
  if (name == "simulate") return BatchMode::Simulate;
  if (name == "analytic") return BatchMode::Analytic;
  if (name == "both") return BatchMode::Both;
  throw InputError("unknown mode '" + name + "' (expected simulate, analytic or both)");
}

std::string to_string(BatchMode mode) {
  switch (mode) {
    case BatchMode::Simulate: return "simulate";
    case BatchMode::Analytic: return "analytic";
    case BatchMode::Both: return "both";
  }
  return "?";
}

bool BatchResult::solver_budget_exceeded() const {
  for (const auto& g : grasps)
    if (!g.error.empty()) return true;
  return false;
}

Predictions BatchResult::simulated_robustness() const {
  Predictions p;
  for (const auto& g : grasps)
    if (g.simulation) p[g.grasp.id] = g.simulation->R;
  return p;
}

Predictions BatchResult::analytic_predictions() const {
  Predictions p;
  for (const auto& g : grasps)
    if (g.analytic) p[g.grasp.id] = g.analytic->success ? 1.0 : 0.0;
  return p;
}

BatchResult run_batch(const ScenarioConfig& config, const std::vector<GraspEntry>& grasps, const BatchOptions& options) {
  if (options.trials < 1) throw InputError("trials must be at least 1");
  using clock = std::chrono::steady_clock;
  BatchResult result;
  result.options = options;
  for (const auto& g : grasps) {
    GraspResult r;
    r.grasp = g;
    if (options.mode != BatchMode::Simulate) {
      const auto t0 = clock::now();
      r.analytic = predict_analytic(config, g.spec);
      r.analytic_runtime = std::chrono::duration<double>(clock::now() - t0).count();
    }
    if (options.mode != BatchMode::Analytic) {
      RobustnessOptions ro;
      ro.workers = options.workers;
      ro.run.record_trajectory = options.record_trajectories;
      const auto t0 = clock::now();
      try {
        r.simulation = estimate_robustness(config, g.spec, options.trials, options.seed, ro);
      } catch (const SolverError& e) {
        r.error = e.what();
      }
      r.simulation_runtime = std::chrono::duration<double>(clock::now() - t0).count();
    }
    result.grasps.push_back(std::move(r));
  }
  return result;
}

namespace {

void trial_row(std::ostream& out, const char* kind, const std::string& id, int trial, const GraspOutcome& o) {
  const auto& p = o.final_object_pose;
  out << kind << ',' << id << ',' << trial << ',' << format_double(o.grasp.center.x()) << ','
      << format_double(o.grasp.center.y()) << ',' << format_double(o.grasp.axis_angle) << ',' << (o.success ? 1 : 0)
      << ',' << to_string(o.phase_reached) << ',' << to_string(o.squeeze_exit) << ',' << format_double(o.psi1) << ','
      << format_double(o.psi2) << ',' << format_double(p.position.x()) << ',' << format_double(p.position.y()) << ','
      << format_double(p.angle) << ",,," << (o.placement_infeasible ? "placement infeasible" : "")
      << (o.valid ? "" : "solver failure") << ",\n";
}

}  // namespace

void write_results_csv(std::ostream& out, const BatchResult& result) {
  out << "kind,grasp_id,trial,center_x,center_y,angle,success,phase,squeeze_exit,psi1,psi2,object_x,object_y,"
         "object_angle,R,analytic_success,note,runtime_s\n";
  for (const auto& g : result.grasps) {
    if (g.simulation) {
      for (std::size_t k = 0; k < g.simulation->trials.size(); ++k)
        trial_row(out, "trial", g.grasp.id, static_cast<int>(k), g.simulation->trials[k]);
      for (std::size_t k = 0; k < g.simulation->invalid.size(); ++k)
        trial_row(out, "invalid", g.grasp.id, static_cast<int>(k), g.simulation->invalid[k]);
    }
    out << "summary," << g.grasp.id << ",," << format_double(g.grasp.spec.center.x()) << ','
        << format_double(g.grasp.spec.center.y()) << ',' << format_double(g.grasp.spec.axis_angle) << ",,,,,,,,,"
        << (g.simulation ? format_double(g.simulation->R) : "") << ','
        << (g.analytic ? (g.analytic->success ? "1" : "0") : "") << ','
        << (!g.error.empty() ? g.error : (g.analytic && g.analytic->miss ? "analytic miss" : "")) << ','
        << format_double(g.simulation_runtime + g.analytic_runtime) << '\n';
  }
}

std::vector<ComparisonRow> comparison_report(const BatchResult& result, const LabelSet& labels, double threshold) {
  std::vector<ComparisonRow> rows;
  const double n = std::max<std::size_t>(1, result.grasps.size());
  double t_analytic = 0.0, t_sim = 0.0;
  for (const auto& g : result.grasps) {
    t_analytic += g.analytic_runtime;
    t_sim += g.simulation_runtime;
  }
  rows.push_back({"Soft Point", compute_metrics(result.analytic_predictions(), labels, threshold), t_analytic / n});
  rows.push_back({"IPC-GraspSim-2D", compute_metrics(result.simulated_robustness(), labels, threshold), t_sim / n});
  return rows;
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "model,AP,AR,F1,TP,FP,TN,FN,threshold,runtime_s\n";
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    out << r.model << ',' << format_double(m.AP) << ',' << format_double(m.AR) << ',' << format_double(m.F1) << ','
        << m.TP << ',' << m.FP << ',' << m.TN << ',' << m.FN << ',' << format_double(m.threshold) << ','
        << format_double(r.runtime) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  for (std::size_t f = 0; f < trajectory.frames.size(); ++f) {
    out << format_double(trajectory.times[f]);
    for (const auto& p : trajectory.frames[f]) out << ',' << format_double(p.x()) << ',' << format_double(p.y());
    out << '\n';
  }
}

}  // namespace graspsim
