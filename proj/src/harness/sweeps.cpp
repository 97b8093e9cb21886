#include "graspsim/harness.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

namespace graspsim {

std::vector<double> default_sweep_E() { return {1e7, 1e8, 1e9, 1e10, 1e11}; }
std::vector<double> default_sweep_mu() { return {0.3, 0.4, 0.5, 0.6}; }

SweepEvaluator simulation_evaluator(int trials, std::uint64_t seed, int workers) {
  return [=](const ScenarioConfig& config, const std::vector<GraspEntry>& grasps) {
    BatchOptions opts;
    opts.trials = trials;
    opts.seed = seed;
    opts.workers = workers;
    const BatchResult r = run_batch(config, grasps, opts);
    if (r.solver_budget_exceeded()) {
      for (const auto& g : r.grasps)
        if (!g.error.empty()) throw SolverError(g.grasp.id + ": " + g.error);
    }
    return r.simulated_robustness();
  };
}

SweepResult param_sweep(const ScenarioConfig& config, const std::vector<double>& E_values,
                        const std::vector<double>& mu_values, const std::vector<GraspEntry>& grasps,
                        const LabelSet& labels, double threshold, const SweepEvaluator& evaluator) {
  if (E_values.empty() || mu_values.empty()) throw InputError("sweep needs at least one value per axis");
  SweepResult out;
  out.E_values = E_values;
  out.mu_values = mu_values;
  for (const double E : E_values) {
    for (const double mu : mu_values) {
      SweepCell cell;
      cell.E = E;
      cell.mu = mu;
      ScenarioConfig c = config;
      c.jaw.pad_material.youngs_modulus = E;
      c.jaw.pad_material.friction_coeff = mu;
      std::vector<GraspEntry> cell_grasps = grasps;
      try {
        c.jaw.pad_material.validate("sweep");
        cell.metrics = compute_metrics(evaluator(c, cell_grasps), labels, threshold);
      } catch (const SolverError& e) {
        cell.error = e.what();
        cell.metrics = MetricsReport{0.0, 0.0, 0.0, 0, 0, 0, 0, threshold};
      }
      out.cells.push_back(cell);
    }
  }
  for (std::size_t i = 1; i < out.cells.size(); ++i) {
    const auto& a = out.cells[i];
    const auto& b = out.cells[out.best];
    if (!a.error.empty()) continue;
    const bool better = !b.error.empty() || a.metrics.F1 > b.metrics.F1 ||
                        (a.metrics.F1 == b.metrics.F1 && (a.E < b.E || (a.E == b.E && a.mu < b.mu)));
    if (better) out.best = i;
  }
  return out;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << "E,mu,AP,AR,F1,TP,FP,TN,FN,best,error\n";
  for (std::size_t i = 0; i < sweep.cells.size(); ++i) {
    const auto& c = sweep.cells[i];
    const auto& m = c.metrics;
    out << format_double(c.E) << ',' << format_double(c.mu) << ',' << format_double(m.AP) << ','
        << format_double(m.AR) << ',' << format_double(m.F1) << ',' << m.TP << ',' << m.FP << ',' << m.TN << ','
        << m.FN << ',' << (i == sweep.best ? 1 : 0) << ',' << c.error << '\n';
  }
}

void write_sweep_grid(std::ostream& out, const SweepResult& sweep) {
  out << "E\\mu";
  for (const double mu : sweep.mu_values) out << ',' << format_double(mu);
  out << '\n';
  for (std::size_t e = 0; e < sweep.E_values.size(); ++e) {
    out << format_double(sweep.E_values[e]);
    for (std::size_t m = 0; m < sweep.mu_values.size(); ++m) out << ',' << format_double(sweep.cell(e, m).metrics.F1);
    out << '\n';
  }
}

std::vector<PsiSweepRow> psi_threshold_sweep(const ScenarioConfig& config, const std::vector<double>& values,
                                             const GraspSpec& grasp) {
  std::vector<PsiSweepRow> rows;
  RunOptions ro;
  ro.squeeze_only = true;
  for (const double v : values) {
    if (!(v >= 0.0)) throw InputError("psi threshold values must be >= 0");
    ScenarioConfig c = config;
    c.physics.psi_threshold = v;
    const GraspOutcome o = run_grasp(c, grasp, ro);
    PsiSweepRow r;
    r.psi_threshold = v;
    r.max_compression = o.max_pad_compression;
    r.psi1 = o.psi1;
    r.psi2 = o.psi2;
    r.squeeze_exit = to_string(o.squeeze_exit);
    if (!o.valid) r.error = o.message;
    if (o.placement_infeasible) r.error = o.message;
    rows.push_back(r);
  }
  return rows;
}

void write_psi_sweep_csv(std::ostream& out, const std::vector<PsiSweepRow>& rows) {
  out << "psi_threshold,max_compression,psi1,psi2,squeeze_exit,error\n";
  for (const auto& r : rows) {
    out << format_double(r.psi_threshold) << ',' << format_double(r.max_compression) << ',' << format_double(r.psi1)
        << ',' << format_double(r.psi2) << ',' << r.squeeze_exit << ',' << r.error << '\n';
  }
}

std::vector<BenchmarkRow> runtime_benchmark(const ScenarioConfig& config, const std::vector<int>& levels,
                                            int repetitions, const GraspSpec& grasp) {
  if (repetitions < 1) throw InputError("repetitions must be at least 1");
  std::vector<BenchmarkRow> rows;
  for (const int level : levels) {
    if (level < 0 || level > 4) throw InputError("subdivision levels must be in 0..4");
    ScenarioConfig c = config;
    c.object.subdivision = level;
    const Scene scene = build_scene(c, grasp);
    BenchmarkRow row;
    row.level = level;
    row.repetitions = repetitions;
    row.object_vertices = static_cast<int>(scene.body(scene.object_index()).mesh.vertices.size());
    row.object_triangles = static_cast<int>(scene.body(scene.object_index()).mesh.triangles.size());
    row.scene_vertices = scene.vertex_count();
    std::vector<double> times;
    for (int k = 0; k < repetitions; ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      const GraspOutcome o = run_grasp(c, grasp);
      times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      row.successes += o.success ? 1 : 0;
    }
    double sum = 0.0;
    for (const double t : times) sum += t;
    row.mean = sum / repetitions;
    double ss = 0.0;
    for (const double t : times) ss += (t - row.mean) * (t - row.mean);
    row.stddev = repetitions > 1 ? std::sqrt(ss / (repetitions - 1)) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows) {
  out << "level,object_vertices,object_triangles,scene_vertices,repetitions,mean_s,std_s,successes\n";
  for (const auto& r : rows) {
    out << r.level << ',' << r.object_vertices << ',' << r.object_triangles << ',' << r.scene_vertices << ','
        << r.repetitions << ',' << format_double(r.mean) << ',' << format_double(r.stddev) << ',' << r.successes
        << '\n';
  }
}

}  // namespace graspsim
