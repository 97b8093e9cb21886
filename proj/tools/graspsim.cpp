// graspsim command line: simulate, analytic, metrics, sweep, psi-sweep, bench, validate.

#include "graspsim/harness.hpp"
#include "graspsim/simd/kernels.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace graspsim;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitSolver = 2;

struct Globals {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int trials = 5;
  std::string out;
  double threshold = 0.5;
  bool dump_trajectories = false;
};

ScenarioConfig load(const Globals& g) {
  ScenarioConfig c = g.config.empty() ? ScenarioConfig{} : load_config(g.config);
  if (g.seed_given) c.seed = g.seed;
  return c;
}

template <class Write>
void emit(const std::string& path, Write&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  write(f);
}

std::vector<GraspEntry> grasps_or_default(const std::string& path, const ScenarioConfig& c) {
  if (!path.empty()) return read_grasp_list(path, c);
  return {GraspEntry{"default", c.default_grasp()}};
}

void dump_trajectories(const BatchResult& r, const std::string& out) {
  const std::filesystem::path dir = out.empty() ? std::filesystem::path("trajectories") : std::filesystem::path(out + ".trajectories");
  std::filesystem::create_directories(dir);
  for (const auto& g : r.grasps) {
    if (!g.simulation) continue;
    for (std::size_t k = 0; k < g.simulation->trials.size(); ++k) {
      const auto& t = g.simulation->trials[k].trajectory;
      if (!t) continue;
      std::ofstream f(dir / (g.grasp.id + "_trial" + std::to_string(k) + ".csv"), std::ios::binary);
      write_trajectory_csv(f, *t);
    }
  }
}

int run_simulate(const Globals& g, const std::string& mode, const std::string& grasps_path,
                 const std::string& labels_path, const std::string& report_path) {
  const ScenarioConfig c = load(g);
  BatchOptions opts;
  opts.mode = parse_batch_mode(mode);
  opts.trials = g.trials;
  opts.seed = c.seed;
  opts.record_trajectories = g.dump_trajectories;
  const auto grasps = grasps_or_default(grasps_path, c);
  const BatchResult r = run_batch(c, grasps, opts);
  emit(g.out, [&](std::ostream& o) { write_results_csv(o, r); });
  if (g.dump_trajectories) dump_trajectories(r, g.out);
  if (!labels_path.empty()) {
    const LabelSet labels = read_labels(labels_path);
    if (opts.mode == BatchMode::Both) {
      const auto rows = comparison_report(r, labels, g.threshold);
      std::string path = report_path;
      if (path.empty() && !g.out.empty()) path = g.out + ".report.csv";
      emit(path, [&](std::ostream& o) { write_comparison_csv(o, rows); });
    } else {
      const Predictions p = opts.mode == BatchMode::Simulate ? r.simulated_robustness() : r.analytic_predictions();
      const std::string model = opts.mode == BatchMode::Simulate ? "IPC-GraspSim-2D" : "Soft Point";
      std::string path = report_path;
      if (path.empty() && !g.out.empty()) path = g.out + ".report.csv";
      emit(path, [&](std::ostream& o) { write_comparison_csv(o, {{model, compute_metrics(p, labels, g.threshold), 0.0}}); });
    }
  }
  if (r.solver_budget_exceeded()) {
    std::cerr << "graspsim: invalid-trial budget exceeded for at least one grasp\n";
    return kExitSolver;
  }
  return 0;
}

Predictions read_predictions(const std::string& path) {
  // Same layout as labels: id,value.
  const LabelSet raw = read_labels(path);
  return Predictions(raw.begin(), raw.end());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar barrier-contact grasp simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Scenario config (JSON)");
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--trials", g.trials, "Perturbed trials per grasp")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output file (default: stdout)");
  app.add_option("--threshold", g.threshold, "Binarization threshold")->check(CLI::Range(0.0, 1.0));
  app.add_flag("--dump-trajectories", g.dump_trajectories, "Write per-trial trajectories");

  std::string mode = "simulate", grasps_path, labels_path, report_path, predictions_path, grid_path;
  auto* sim = app.add_subcommand("simulate", "Run grasps (simulate, analytic or both)");
  sim->add_option("--mode", mode, "simulate | analytic | both");
  sim->add_option("--grasps", grasps_path, "Grasp list file");
  sim->add_option("--labels", labels_path, "Label file for the metrics report");
  sim->add_option("--report", report_path, "Metrics report output");

  auto* ana = app.add_subcommand("analytic", "Soft-point baseline predictions");
  ana->add_option("--grasps", grasps_path, "Grasp list file");
  ana->add_option("--labels", labels_path, "Label file for the metrics report");
  ana->add_option("--report", report_path, "Metrics report output");

  auto* met = app.add_subcommand("metrics", "AP/AR/F1 of predictions against labels");
  met->add_option("--predictions", predictions_path, "id,value file")->required();
  met->add_option("--labels", labels_path, "id,robustness file")->required();

  std::vector<double> E_values = default_sweep_E(), mu_values = default_sweep_mu();
  auto* swp = app.add_subcommand("sweep", "Pad Young's modulus x friction grid search");
  swp->add_option("--grasps", grasps_path, "Grasp list file")->required();
  swp->add_option("--labels", labels_path, "Label file")->required();
  swp->add_option("--E", E_values, "Young's modulus values")->delimiter(',');
  swp->add_option("--mu", mu_values, "Friction values")->delimiter(',');
  swp->add_option("--grid", grid_path, "F1 grid output");

  std::vector<double> psi_values{5e3, 5e4, 5e5};
  auto* psi = app.add_subcommand("psi-sweep", "Pad compression versus squeeze threshold");
  psi->add_option("--values", psi_values, "Threshold values")->delimiter(',');

  std::vector<int> levels{0, 1, 2, 3, 4};
  int reps = 10;
  auto* bench = app.add_subcommand("bench", "Runtime versus object mesh subdivision");
  bench->add_option("--levels", levels, "Subdivision levels")->delimiter(',');
  bench->add_option("--reps", reps, "Repetitions per level")->check(CLI::PositiveNumber);

  auto* val = app.add_subcommand("validate", "Build and validate the scene of a config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    if (sim->parsed()) return run_simulate(g, mode, grasps_path, labels_path, report_path);
    if (ana->parsed()) return run_simulate(g, "analytic", grasps_path, labels_path, report_path);
    if (met->parsed()) {
      const auto m = compute_metrics(read_predictions(predictions_path), read_labels(labels_path), g.threshold);
      emit(g.out, [&](std::ostream& o) { write_comparison_csv(o, {{"predictions", m, 0.0}}); });
      return 0;
    }
    if (swp->parsed()) {
      const ScenarioConfig c = load(g);
      const auto grasps = read_grasp_list(grasps_path, c);
      const auto labels = read_labels(labels_path);
      const auto r = param_sweep(c, E_values, mu_values, grasps, labels, g.threshold,
                                 simulation_evaluator(g.trials, c.seed));
      emit(g.out, [&](std::ostream& o) { write_sweep_csv(o, r); });
      if (!grid_path.empty()) emit(grid_path, [&](std::ostream& o) { write_sweep_grid(o, r); });
      return 0;
    }
    if (psi->parsed()) {
      const ScenarioConfig c = load(g);
      const auto rows = psi_threshold_sweep(c, psi_values, c.default_grasp());
      emit(g.out, [&](std::ostream& o) { write_psi_sweep_csv(o, rows); });
      return 0;
    }
    if (bench->parsed()) {
      const ScenarioConfig c = load(g);
      const auto rows = runtime_benchmark(c, levels, reps, c.default_grasp());
      emit(g.out, [&](std::ostream& o) { write_benchmark_csv(o, rows); });
      return 0;
    }
    if (val->parsed()) {
      const ScenarioConfig c = load(g);
      const Scene scene = build_scene(c);
      std::cout << "scene valid: " << scene.body_count() << " bodies, " << scene.vertex_count() << " vertices ("
                << simd::isa_name(simd::kernels().isa) << " kernels)\n";
      return 0;
    }
  } catch (const InputError& e) {
    std::cerr << "graspsim: " << e.what() << '\n';
    return kExitInput;
  } catch (const SolverError& e) {
    std::cerr << "graspsim: " << e.what() << '\n';
    return kExitSolver;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "graspsim: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}
