#pragma once
// Batch evaluation, label ingestion, AP/AR/F1 metrics, sweeps and benchmarks.

#include "graspsim/analytic.hpp"
#include "graspsim/config.hpp"
#include "graspsim/grasp.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace graspsim {

struct MetricsReport {
  double AP = 1.0, AR = 1.0, F1 = 1.0;
  long TP = 0, FP = 0, TN = 0, FN = 0;
  double threshold = 0.5;
};

using LabelSet = std::map<std::string, double>;
using Predictions = std::map<std::string, double>;

/// Binarizes predictions and labels at `threshold` (>= is positive) and
/// tallies the confusion cells. Throws InputError listing ids without labels.
MetricsReport compute_metrics(const Predictions& predictions, const LabelSet& labels, double threshold = 0.5);

/// `grasp_id,robustness` per line; an optional header line is skipped.
LabelSet read_labels(std::istream& in);
LabelSet read_labels(const std::filesystem::path& path);

struct GraspEntry {
  std::string id;
  GraspSpec spec;
};

/// `id,center_x,center_y,angle[,key=value...]` per line with keys profile,
/// max_width, closing_speed, lift_speed. Jaw defaults come from `config`.
std::vector<GraspEntry> read_grasp_list(std::istream& in, const ScenarioConfig& config);
std::vector<GraspEntry> read_grasp_list(const std::filesystem::path& path, const ScenarioConfig& config);

enum class BatchMode { Simulate, Analytic, Both };
BatchMode parse_batch_mode(const std::string& name);
std::string to_string(BatchMode mode);

struct BatchOptions {
  BatchMode mode = BatchMode::Simulate;
  int trials = 5;
  std::uint64_t seed = 0;
  int workers = 0;
  bool record_trajectories = false;
};

struct GraspResult {
  GraspEntry grasp;
  std::optional<RobustnessEstimate> simulation;
  std::optional<AnalyticPrediction> analytic;
  double simulation_runtime = 0.0;  // s
  double analytic_runtime = 0.0;    // s
  std::string error;                // non-empty when the trial budget was exceeded
};

struct BatchResult {
  BatchOptions options;
  std::vector<GraspResult> grasps;
  bool solver_budget_exceeded() const;
  Predictions simulated_robustness() const;
  Predictions analytic_predictions() const;
};

BatchResult run_batch(const ScenarioConfig& config, const std::vector<GraspEntry>& grasps, const BatchOptions& options);

/// Comma-separated results: one row per valid trial then one summary row per
/// grasp. Column `runtime_s` is the only timing field.
void write_results_csv(std::ostream& out, const BatchResult& result);

struct ComparisonRow {
  std::string model;
  MetricsReport metrics;
  double runtime = 0.0;  // mean seconds per grasp
};

/// Rows "Soft Point" and "IPC-GraspSim-2D" for a batch run in mode both.
std::vector<ComparisonRow> comparison_report(const BatchResult& result, const LabelSet& labels, double threshold);
void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);

/// One frame per line: time, then x,y for every vertex in global order.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

struct SweepCell {
  double E = 0.0, mu = 0.0;
  MetricsReport metrics;
  std::string error;
};

struct SweepResult {
  std::vector<double> E_values, mu_values;
  std::vector<SweepCell> cells;  // row-major: E outer, mu inner
  std::size_t best = 0;
  const SweepCell& cell(std::size_t e, std::size_t m) const { return cells[e * mu_values.size() + m]; }
};

/// Robustness predictions for all grasps under a configuration.
using SweepEvaluator = std::function<Predictions(const ScenarioConfig&, const std::vector<GraspEntry>&)>;

/// Default evaluator: simulated robustness with the given trial count and seed.
SweepEvaluator simulation_evaluator(int trials, std::uint64_t seed, int workers = 0);

std::vector<double> default_sweep_E();
std::vector<double> default_sweep_mu();

/// Evaluates every (E, mu) cell on the pad material. The best cell has the
/// highest F1; ties go to lower E, then lower mu.
SweepResult param_sweep(const ScenarioConfig& config, const std::vector<double>& E_values,
                        const std::vector<double>& mu_values, const std::vector<GraspEntry>& grasps,
                        const LabelSet& labels, double threshold, const SweepEvaluator& evaluator);
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
/// F1 grid: one row per E, one column per mu.
void write_sweep_grid(std::ostream& out, const SweepResult& sweep);

struct PsiSweepRow {
  double psi_threshold = 0.0;
  double max_compression = 0.0;
  double psi1 = 0.0, psi2 = 0.0;
  std::string squeeze_exit;
  std::string error;
};

std::vector<PsiSweepRow> psi_threshold_sweep(const ScenarioConfig& config, const std::vector<double>& values,
                                             const GraspSpec& grasp);
void write_psi_sweep_csv(std::ostream& out, const std::vector<PsiSweepRow>& rows);

struct BenchmarkRow {
  int level = 0;
  int object_vertices = 0;
  int scene_vertices = 0;
  int object_triangles = 0;
  int repetitions = 0;
  double mean = 0.0, stddev = 0.0;  // s per grasp
  int successes = 0;
};

std::vector<BenchmarkRow> runtime_benchmark(const ScenarioConfig& config, const std::vector<int>& levels,
                                            int repetitions, const GraspSpec& grasp);
void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace graspsim
