#ifndef RTM_BENCH_H_
#define RTM_BENCH_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rtm/evaluation.h"
#include "rtm/instance.h"
#include "rtm/solvers.h"

namespace rtm {

// Method tags accepted in experiment configs.
inline constexpr const char* kAllMethods[] = {
    "dap", "npp", "homog_exact", "surrogate", "saa", "brute_force"};

bool IsKnownMethod(const std::string& method);

struct GridCell {
  int num_demands = 1;
  int num_supplies = 1;
  int theta = 1;
  UtilityModel utility_model = Synthetic3Part{};
  ProbModel prob_model = HomogeneousProb{};
  std::string label;
};

enum class EvalMode {
  kAuto,  // exact for bench and sweep, Monte Carlo for out-of-sample
  kExact,
  kMonteCarlo,
};

struct SweepSpec {
  std::string axis;  // "theta", "p" or "gamma"
  std::vector<double> values;
  // On a theta sweep, also set num_supplies = theta * num_demands.
  bool gamma_follows_theta = false;
};

struct ExperimentConfig {
  uint64_t seed = 0;
  int replications = 10;
  std::vector<std::string> methods;
  std::vector<GridCell> grid;
  std::vector<PerturbSpec> perturbations;
  // tau, strategy, local search and Frank-Wolfe settings, time limit and
  // enumeration budget for every solver call. The seed is derived per run.
  SolverConfig solver;
  EvalMode evaluation = EvalMode::kAuto;
  // Defaults: 100000 when num_demands * num_supplies <= 32, else 10000.
  std::optional<int> mc_eval_samples;
  // Defaults: 1000 when num_demands <= 10, else 100.
  std::optional<int> saa_samples;
  // Correlation of acceptances in evaluation; forces Monte Carlo when > 0.
  double correlation_rho = 0.0;
  int threads = 1;
  std::optional<SweepSpec> sweep;
  std::string output_dir = "rtm_out";
};

// Throws InvalidArgument on unknown keys, bad values or empty grid/methods.
ExperimentConfig ExperimentConfigFromJson(const std::string& text);
void ValidateExperimentConfig(const ExperimentConfig& cfg);

struct ResultRow {
  std::string instance_id;
  int replication = 0;
  std::string scenario_tag = "nominal";
  std::string method;
  bool ok = true;
  std::string note;  // reason when skipped
  double solver_objective = 0.0;
  double exact_value = 0.0;
  // Value used for gaps: exact_value or a Monte Carlo estimate, see
  // eval_method.
  double eval_value = 0.0;
  std::string eval_method;
  int64_t eval_samples = 0;
  double gap_to_best_pct = 0.0;
  double wall_time_s = 0.0;
};

// "c003-D10-S40-T4-label": grid index, sizes and the optional label.
std::string InstanceId(int cell_index, const GridCell& cell);

// Instance of one grid cell and replication; the seed is derived from the
// master seed, the instance id and the replication.
Instance BuildInstance(const ExperimentConfig& cfg, int cell_index,
                       int replication);

// Fills gap_to_best_pct within every (instance, replication, scenario)
// group: 100 * (best - eval_value) / best over ok rows, 0 when best <= 0.
void ComputeGaps(std::vector<ResultRow>& rows);

// Canonical order: instance_id, replication, scenario_tag, method.
void SortRows(std::vector<ResultRow>& rows);

// Every grid cell x replication x method, evaluated on nominal
// probabilities. Rows are sorted and carry gaps.
std::vector<ResultRow> RunBenchmark(const ExperimentConfig& cfg);

// Solves on nominal probabilities and evaluates each solution under every
// perturbation; rows are tagged "nominal" or the perturbation tag.
std::vector<ResultRow> RunOutOfSample(const ExperimentConfig& cfg);

struct SweepRow {
  std::string axis;
  double value = 0.0;
  std::string method;
  int n = 0;
  double mean_objective = 0.0;
  // Half-width of the 95% t-interval of the mean; 0 when n < 2.
  double ci95 = 0.0;
  double mean_gap_pct = 0.0;
  double mean_cpu_s = 0.0;
  // 100 * mean_cpu_s / mean CPU of the first configured method at the point.
  double cpu_ratio_pct = 0.0;
};

// Runs the benchmark on the single grid cell with the sweep axis set to each
// value in turn. Also returns the underlying rows through `rows` if given.
std::vector<SweepRow> RunSensitivity(const ExperimentConfig& cfg,
                                     std::vector<ResultRow>* rows = nullptr);

// Fixed-format writers; numbers use 6 significant digits.
std::string ResultsCsv(const std::vector<ResultRow>& rows);
std::string TimingCsv(const std::vector<ResultRow>& rows);
// Per (instance_id, scenario_tag, method): Gap-A, Gap-W, CPU mean, counts.
std::string SummaryJson(const std::vector<ResultRow>& rows);
std::string SweepCsv(const std::vector<SweepRow>& rows);

// Writes results.csv, timing.csv and summary.json into `dir` (created if
// missing). Throws InvalidArgument on empty rows before touching the disk.
void EmitReport(const std::vector<ResultRow>& rows, const std::string& dir);
void EmitSweep(const std::vector<SweepRow>& rows, const std::string& dir);

// Parses results.csv back into rows (wall times are not part of it).
std::vector<ResultRow> ParseResultsCsv(const std::string& text);

// %.6g formatting shared by every writer.
std::string FormatNumber(double v);

}  // namespace rtm

#endif  // RTM_BENCH_H_
