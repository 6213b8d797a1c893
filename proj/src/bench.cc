#include "rtm/bench.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <set>
#include <thread>
#include <tuple>
#include <utility>

#include <boost/math/distributions/students_t.hpp>

#include "json.hpp"
#include "rtm/errors.h"
#include "rtm/json_io.h"
#include "rtm/rng.h"

namespace rtm {
namespace {

using nlohmann::json;

constexpr int kTinyCells = 32;

template <class T>
T Get(const json& doc, const char* key, const std::string& what) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(what + " field '" + key +
                          "' is missing or has the wrong type");
  }
}

void AllowKeys(const json& doc, const std::string& what,
               std::initializer_list<const char*> keys) {
  if (!doc.is_object()) throw InvalidArgument(what + " must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (std::none_of(keys.begin(), keys.end(),
                     [&](const char* k) { return key == k; })) {
      throw InvalidArgument("unknown key '" + key + "' in " + what);
    }
  }
}

GridCell GridCellFromJson(const json& doc, size_t index) {
  const std::string what = "grid[" + std::to_string(index) + "]";
  AllowKeys(doc, what,
            {"num_demands", "num_supplies", "theta", "utility", "prob",
             "label"});
  GridCell cell;
  cell.num_demands = Get<int>(doc, "num_demands", what);
  cell.num_supplies = Get<int>(doc, "num_supplies", what);
  cell.theta = Get<int>(doc, "theta", what);
  if (doc.contains("utility")) {
    cell.utility_model = UtilityModelFromJson(doc.at("utility"));
  }
  if (doc.contains("prob")) cell.prob_model = ProbModelFromJson(doc.at("prob"));
  if (doc.contains("label")) cell.label = Get<std::string>(doc, "label", what);
  return cell;
}

EvalMode ParseEvalMode(const std::string& name) {
  if (name == "auto") return EvalMode::kAuto;
  if (name == "exact") return EvalMode::kExact;
  if (name == "monte_carlo") return EvalMode::kMonteCarlo;
  throw InvalidArgument("unknown evaluation '" + name +
                        "' (expected auto, exact or monte_carlo)");
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::vector<std::string>> ParseCsv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (size_t k = 0; k < text.size(); ++k) {
    const char c = text[k];
    if (quoted) {
      if (c == '"' && k + 1 < text.size() && text[k + 1] == '"') {
        field += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    any = true;
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field");
  if (any) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

double Rounded(double v) { return std::strtod(FormatNumber(v).c_str(), nullptr); }

double ParseDouble(const std::string& s, const char* column) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') {
    throw ParseError(std::string("bad number in column ") + column + ": '" + s +
                     "'");
  }
  return v;
}

int DefaultMcSamples(const Instance& instance) {
  return instance.num_demands * instance.num_supplies <= kTinyCells ? 100'000
                                                                     : 10'000;
}

int DefaultSaaSamples(const Instance& instance) {
  return instance.num_demands <= 10 ? 1000 : 100;
}

GenConfig CellGenConfig(const GridCell& cell, const std::string& id,
                        uint64_t seed) {
  GenConfig gen;
  gen.num_demands = cell.num_demands;
  gen.num_supplies = cell.num_supplies;
  gen.theta = cell.theta;
  gen.utility_model = cell.utility_model;
  gen.prob_model = cell.prob_model;
  gen.seed = seed;
  gen.label = id;
  return gen;
}

struct Task {
  int cell_index;
  GridCell cell;
  int replication;
};

// Exact when independence holds and nothing asks for sampling.
bool UseExact(const ExperimentConfig& cfg, bool out_of_sample) {
  if (cfg.correlation_rho > 0.0) return false;
  switch (cfg.evaluation) {
    case EvalMode::kExact:
      return true;
    case EvalMode::kMonteCarlo:
      return false;
    case EvalMode::kAuto:
      return !out_of_sample;
  }
  return true;
}

void Evaluate(const ExperimentConfig& cfg, bool exact, const Instance& inst,
              const Recommendation& rec, uint64_t seed, ResultRow& row) {
  row.exact_value = ExactExpectedUtility(inst, rec).total;
  if (exact) {
    row.eval_value = row.exact_value;
    row.eval_method = "exact";
    row.eval_samples = 0;
    return;
  }
  const int n = cfg.mc_eval_samples.value_or(DefaultMcSamples(inst));
  const Evaluation mc = MonteCarloValue(
      inst, rec, n, seed, Correlation::SupplierCommonFactor(cfg.correlation_rho));
  row.eval_value = mc.total;
  row.eval_method = "monte_carlo";
  row.eval_samples = n;
}

// Rows of one (cell, replication): every method solved on nominal
// probabilities, then evaluated on the nominal instance and, when
// `out_of_sample`, on every perturbed instance.
std::vector<ResultRow> RunTask(const ExperimentConfig& cfg, const Task& task,
                               bool out_of_sample) {
  const std::string id = InstanceId(task.cell_index, task.cell);
  const uint64_t inst_seed = DeriveSeed(cfg.seed, id, task.replication);
  const Instance nominal = Generate(CellGenConfig(task.cell, id, inst_seed));

  std::vector<std::pair<std::string, Instance>> scenarios;
  scenarios.emplace_back("nominal", nominal);
  if (out_of_sample) {
    for (PerturbSpec spec : cfg.perturbations) {
      spec.seed = DeriveSeed(inst_seed, "perturb:" + spec.Tag());
      scenarios.emplace_back(spec.Tag(), PerturbProbabilities(nominal, spec));
    }
  }
  const bool exact = UseExact(cfg, out_of_sample);

  std::vector<ResultRow> rows;
  for (const std::string& method : cfg.methods) {
    SolverConfig sc = cfg.solver;
    sc.seed = DeriveSeed(inst_seed, "solver:" + method);
    sc.saa_samples = cfg.saa_samples.value_or(DefaultSaaSamples(nominal));
    std::optional<SolveReport> report;
    std::string skip_reason;
    try {
      report = SolveMethod(nominal, method, sc);
    } catch (const InvalidArgument& e) {
      skip_reason = e.what();
    } catch (const BudgetExceeded& e) {
      skip_reason = e.what();
    }
    for (const auto& [tag, inst] : scenarios) {
      ResultRow row;
      row.instance_id = id;
      row.replication = task.replication;
      row.scenario_tag = tag;
      row.method = method;
      if (!report) {
        row.ok = false;
        row.note = skip_reason;
        rows.push_back(std::move(row));
        continue;
      }
      row.solver_objective = report->solver_objective;
      row.wall_time_s = report->wall_time;
      if (report->hit_time_limit) row.note = "time limit reached";
      Evaluate(cfg, exact, inst, report->rec,
               DeriveSeed(inst_seed, "evaluation:" + tag), row);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<ResultRow> RunTasks(const ExperimentConfig& cfg,
                                const std::vector<Task>& tasks,
                                bool out_of_sample) {
  std::vector<std::vector<ResultRow>> per_task(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t t = next++; t < tasks.size(); t = next++) {
      try {
        per_task[t] = RunTask(cfg, tasks[t], out_of_sample);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const int threads =
      std::max(1, std::min<int>(cfg.threads, static_cast<int>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<ResultRow> rows;
  for (auto& chunk : per_task) {
    for (auto& row : chunk) rows.push_back(std::move(row));
  }
  ComputeGaps(rows);
  SortRows(rows);
  return rows;
}

std::vector<Task> GridTasks(const ExperimentConfig& cfg) {
  std::vector<Task> tasks;
  for (size_t c = 0; c < cfg.grid.size(); ++c) {
    for (int r = 0; r < cfg.replications; ++r) {
      tasks.push_back({static_cast<int>(c), cfg.grid[c], r});
    }
  }
  return tasks;
}

GridCell SweepCell(const GridCell& base, const SweepSpec& sweep, double v) {
  GridCell cell = base;
  if (sweep.axis == "theta") {
    if (v < 1 || v != std::floor(v)) {
      throw InvalidArgument("theta sweep values must be positive integers");
    }
    cell.theta = static_cast<int>(v);
    if (sweep.gamma_follows_theta) {
      cell.num_supplies = cell.theta * cell.num_demands;
    }
  } else if (sweep.axis == "p") {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidArgument("p sweep values must lie in [0, 1]");
    }
    cell.prob_model = HomogeneousProb{v};
  } else if (sweep.axis == "gamma") {
    const double supplies = v * cell.num_demands;
    if (supplies < 1 || std::abs(supplies - std::round(supplies)) > 1e-9) {
      throw InvalidArgument(
          "gamma sweep values times num_demands must be positive integers");
    }
    cell.num_supplies = static_cast<int>(std::llround(supplies));
  }
  cell.label = (base.label.empty() ? "" : base.label + "-") + sweep.axis +
               "=" + FormatNumber(v);
  return cell;
}

}  // namespace

bool IsKnownMethod(const std::string& method) {
  return std::any_of(std::begin(kAllMethods), std::end(kAllMethods),
                     [&](const char* m) { return method == m; });
}

std::string FormatNumber(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  // Avoid a "-0" that would differ from "0" between platforms.
  return std::string(buf) == "-0" ? "0" : buf;
}

ExperimentConfig ExperimentConfigFromJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("experiment config: ") + e.what());
  }
  const std::string what = "experiment config";
  AllowKeys(doc, what,
            {"seed", "replications", "methods", "grid", "perturbations", "tau",
             "strategy", "ls_max_iters", "multistart_count",
             "frank_wolfe_bound", "frank_wolfe_iters", "time_limit_seconds",
             "enumeration_budget", "evaluation", "mc_eval_samples",
             "saa_samples", "correlation_rho", "threads", "sweep",
             "output_dir"});
  ExperimentConfig cfg;
  if (doc.contains("seed")) cfg.seed = Get<uint64_t>(doc, "seed", what);
  if (doc.contains("replications")) {
    cfg.replications = Get<int>(doc, "replications", what);
  }
  cfg.methods = Get<std::vector<std::string>>(doc, "methods", what);
  const json& grid = doc.contains("grid") ? doc.at("grid") : json::array();
  if (!grid.is_array()) throw InvalidArgument("grid must be an array");
  for (size_t k = 0; k < grid.size(); ++k) {
    cfg.grid.push_back(GridCellFromJson(grid[k], k));
  }
  if (doc.contains("perturbations")) {
    const json& list = doc.at("perturbations");
    if (!list.is_array()) throw InvalidArgument("perturbations must be an array");
    for (const json& p : list) {
      AllowKeys(p, "perturbation", {"kind", "width"});
      PerturbSpec spec;
      spec.kind = ParsePerturbKind(Get<std::string>(p, "kind", "perturbation"));
      if (p.contains("width")) spec.width = Get<double>(p, "width", "perturbation");
      cfg.perturbations.push_back(spec);
    }
  }
  SolverConfig& s = cfg.solver;
  if (doc.contains("tau")) s.tau = Get<double>(doc, "tau", what);
  if (doc.contains("strategy")) {
    s.strategy = ParseStrategy(Get<std::string>(doc, "strategy", what));
  }
  if (doc.contains("ls_max_iters")) {
    s.ls_max_iters = Get<int>(doc, "ls_max_iters", what);
  }
  if (doc.contains("multistart_count")) {
    s.multistart_count = Get<int>(doc, "multistart_count", what);
  }
  if (doc.contains("frank_wolfe_bound")) {
    s.frank_wolfe_bound = Get<bool>(doc, "frank_wolfe_bound", what);
  }
  if (doc.contains("frank_wolfe_iters")) {
    s.frank_wolfe_iters = Get<int>(doc, "frank_wolfe_iters", what);
  }
  if (doc.contains("time_limit_seconds")) {
    s.time_limit_seconds = Get<double>(doc, "time_limit_seconds", what);
  }
  if (doc.contains("enumeration_budget")) {
    s.enumeration_budget = Get<int64_t>(doc, "enumeration_budget", what);
  }
  if (doc.contains("evaluation")) {
    cfg.evaluation = ParseEvalMode(Get<std::string>(doc, "evaluation", what));
  }
  if (doc.contains("mc_eval_samples")) {
    cfg.mc_eval_samples = Get<int>(doc, "mc_eval_samples", what);
  }
  if (doc.contains("saa_samples")) {
    cfg.saa_samples = Get<int>(doc, "saa_samples", what);
  }
  if (doc.contains("correlation_rho")) {
    cfg.correlation_rho = Get<double>(doc, "correlation_rho", what);
  }
  if (doc.contains("threads")) cfg.threads = Get<int>(doc, "threads", what);
  if (doc.contains("sweep")) {
    const json& sw = doc.at("sweep");
    AllowKeys(sw, "sweep", {"axis", "values", "gamma_follows_theta"});
    SweepSpec spec;
    spec.axis = Get<std::string>(sw, "axis", "sweep");
    spec.values = Get<std::vector<double>>(sw, "values", "sweep");
    if (sw.contains("gamma_follows_theta")) {
      spec.gamma_follows_theta = Get<bool>(sw, "gamma_follows_theta", "sweep");
    }
    cfg.sweep = spec;
  }
  if (doc.contains("output_dir")) {
    cfg.output_dir = Get<std::string>(doc, "output_dir", what);
  }
  ValidateExperimentConfig(cfg);
  return cfg;
}

void ValidateExperimentConfig(const ExperimentConfig& cfg) {
  if (cfg.replications < 1) throw InvalidArgument("replications must be >= 1");
  if (cfg.methods.empty()) throw InvalidArgument("methods must not be empty");
  std::set<std::string> seen;
  for (const std::string& m : cfg.methods) {
    if (!IsKnownMethod(m)) {
      throw InvalidArgument("unknown method '" + m +
                            "' (expected dap, npp, homog_exact, surrogate, "
                            "saa or brute_force)");
    }
    if (!seen.insert(m).second) {
      throw InvalidArgument("method '" + m + "' listed twice");
    }
  }
  if (cfg.grid.empty()) throw InvalidArgument("grid must not be empty");
  for (size_t k = 0; k < cfg.grid.size(); ++k) {
    const GridCell& c = cfg.grid[k];
    if (c.num_demands < 1 || c.num_supplies < 1 || c.theta < 1) {
      throw InvalidArgument("grid[" + std::to_string(k) +
                            "] needs positive num_demands, num_supplies and "
                            "theta");
    }
  }
  std::set<std::string> tags;
  for (const PerturbSpec& p : cfg.perturbations) {
    if (p.width && !(*p.width >= 0.0)) {
      throw InvalidArgument("perturbation width must be >= 0");
    }
    if (!tags.insert(p.Tag()).second) {
      throw InvalidArgument("perturbation " + p.Tag() + " listed twice");
    }
  }
  ValidateSolverConfig(cfg.solver);
  if (cfg.mc_eval_samples && *cfg.mc_eval_samples < 1) {
    throw InvalidArgument("mc_eval_samples must be >= 1");
  }
  if (cfg.saa_samples && *cfg.saa_samples < 1) {
    throw InvalidArgument("saa_samples must be >= 1");
  }
  if (!(cfg.correlation_rho >= 0.0 && cfg.correlation_rho <= 1.0)) {
    throw InvalidArgument("correlation_rho must lie in [0, 1]");
  }
  if (cfg.threads < 1) throw InvalidArgument("threads must be >= 1");
  if (cfg.sweep) {
    const std::string& axis = cfg.sweep->axis;
    if (axis != "theta" && axis != "p" && axis != "gamma") {
      throw InvalidArgument("unknown sweep axis '" + axis +
                            "' (expected theta, p or gamma)");
    }
    if (cfg.sweep->values.empty()) {
      throw InvalidArgument("sweep values must not be empty");
    }
  }
}

std::string InstanceId(int cell_index, const GridCell& cell) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "c%03d-D%d-S%d-T%d", cell_index,
                cell.num_demands, cell.num_supplies, cell.theta);
  std::string id = buf;
  if (!cell.label.empty()) id += "-" + cell.label;
  return id;
}

Instance BuildInstance(const ExperimentConfig& cfg, int cell_index,
                       int replication) {
  const GridCell& cell = cfg.grid.at(cell_index);
  const std::string id = InstanceId(cell_index, cell);
  return Generate(
      CellGenConfig(cell, id, DeriveSeed(cfg.seed, id, replication)));
}

void ComputeGaps(std::vector<ResultRow>& rows) {
  using Key = std::tuple<std::string, int, std::string>;
  std::map<Key, double> best;
  for (const ResultRow& r : rows) {
    if (!r.ok) continue;
    const Key key{r.instance_id, r.replication, r.scenario_tag};
    auto [it, fresh] = best.emplace(key, r.eval_value);
    if (!fresh) it->second = std::max(it->second, r.eval_value);
  }
  for (ResultRow& r : rows) {
    r.gap_to_best_pct = 0.0;
    if (!r.ok) continue;
    const double b = best.at({r.instance_id, r.replication, r.scenario_tag});
    if (b > 0.0 && r.eval_value < b) {
      r.gap_to_best_pct = 100.0 * (b - r.eval_value) / b;
    }
  }
}

void SortRows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRow& a, const ResultRow& b) {
                     return std::tie(a.instance_id, a.replication,
                                     a.scenario_tag, a.method) <
                            std::tie(b.instance_id, b.replication,
                                     b.scenario_tag, b.method);
                   });
}

std::vector<ResultRow> RunBenchmark(const ExperimentConfig& cfg) {
  ValidateExperimentConfig(cfg);
  return RunTasks(cfg, GridTasks(cfg), false);
}

std::vector<ResultRow> RunOutOfSample(const ExperimentConfig& cfg) {
  ValidateExperimentConfig(cfg);
  if (cfg.methods.size() < 2) {
    throw InvalidArgument("out-of-sample comparison needs at least two methods");
  }
  if (cfg.perturbations.empty()) {
    throw InvalidArgument("out-of-sample comparison needs perturbations");
  }
  return RunTasks(cfg, GridTasks(cfg), true);
}

std::vector<SweepRow> RunSensitivity(const ExperimentConfig& cfg,
                                     std::vector<ResultRow>* rows_out) {
  ValidateExperimentConfig(cfg);
  if (!cfg.sweep) throw InvalidArgument("sensitivity run needs a sweep");
  if (cfg.grid.size() != 1) {
    throw InvalidArgument("sensitivity run needs exactly one grid cell");
  }
  const SweepSpec& sweep = *cfg.sweep;
  std::vector<Task> tasks;
  std::vector<std::string> ids;
  for (size_t k = 0; k < sweep.values.size(); ++k) {
    const GridCell cell = SweepCell(cfg.grid[0], sweep, sweep.values[k]);
    ids.push_back(InstanceId(static_cast<int>(k), cell));
    for (int r = 0; r < cfg.replications; ++r) {
      tasks.push_back({static_cast<int>(k), cell, r});
    }
  }
  const std::vector<ResultRow> rows = RunTasks(cfg, tasks, false);

  std::vector<SweepRow> out;
  for (size_t k = 0; k < sweep.values.size(); ++k) {
    double reference_cpu = 0.0;
    for (size_t m = 0; m < cfg.methods.size(); ++m) {
      SweepRow s;
      s.axis = sweep.axis;
      s.value = sweep.values[k];
      s.method = cfg.methods[m];
      std::vector<double> values;
      double gap = 0.0;
      double cpu = 0.0;
      for (const ResultRow& r : rows) {
        if (r.instance_id != ids[k] || r.method != s.method || !r.ok) continue;
        values.push_back(r.eval_value);
        gap += r.gap_to_best_pct;
        cpu += r.wall_time_s;
      }
      s.n = static_cast<int>(values.size());
      if (s.n > 0) {
        double sum = 0.0;
        for (double v : values) sum += v;
        s.mean_objective = sum / s.n;
        s.mean_gap_pct = gap / s.n;
        s.mean_cpu_s = cpu / s.n;
      }
      if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean_objective) * (v - s.mean_objective);
        const double sd = std::sqrt(ss / (s.n - 1));
        const boost::math::students_t dist(s.n - 1);
        s.ci95 = boost::math::quantile(dist, 0.975) * sd / std::sqrt(s.n);
      }
      if (m == 0) reference_cpu = s.mean_cpu_s;
      s.cpu_ratio_pct = reference_cpu > 0.0 ? 100.0 * s.mean_cpu_s / reference_cpu
                                            : 0.0;
      out.push_back(s);
    }
  }
  if (rows_out) *rows_out = rows;
  return out;
}

std::string ResultsCsv(const std::vector<ResultRow>& rows) {
  std::string out =
      "instance_id,replication,scenario_tag,method,status,solver_objective,"
      "exact_value,eval_value,eval_method,eval_samples,gap_to_best_pct,note\n";
  for (const ResultRow& r : rows) {
    out += CsvField(r.instance_id) + ',' + std::to_string(r.replication) +
           ',' + CsvField(r.scenario_tag) + ',' + CsvField(r.method) + ',' +
           (r.ok ? "ok" : "skipped") + ',';
    if (r.ok) {
      out += FormatNumber(r.solver_objective) + ',' +
             FormatNumber(r.exact_value) + ',' + FormatNumber(r.eval_value) +
             ',' + r.eval_method + ',' + std::to_string(r.eval_samples) + ',' +
             FormatNumber(r.gap_to_best_pct) + ',';
    } else {
      out += ",,,,,,";
    }
    out += CsvField(r.note) + '\n';
  }
  return out;
}

std::string TimingCsv(const std::vector<ResultRow>& rows) {
  std::string out = "instance_id,replication,scenario_tag,method,wall_time_s\n";
  for (const ResultRow& r : rows) {
    out += CsvField(r.instance_id) + ',' + std::to_string(r.replication) +
           ',' + CsvField(r.scenario_tag) + ',' + CsvField(r.method) + ',' +
           FormatNumber(r.wall_time_s) + '\n';
  }
  return out;
}

std::string SummaryJson(const std::vector<ResultRow>& rows) {
  struct Acc {
    int ok = 0;
    int skipped = 0;
    double gap_sum = 0.0;
    double gap_max = 0.0;
    double cpu_sum = 0.0;
    double value_sum = 0.0;
  };
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, Acc> groups;
  std::vector<Key> order;
  for (const ResultRow& r : rows) {
    const Key key{r.instance_id, r.scenario_tag, r.method};
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) order.push_back(key);
    Acc& a = it->second;
    if (!r.ok) {
      ++a.skipped;
      continue;
    }
    ++a.ok;
    // Aggregate the values as written to the CSV so the summary can be
    // recomputed from it exactly.
    const double gap = Rounded(r.gap_to_best_pct);
    a.gap_sum += gap;
    a.gap_max = std::max(a.gap_max, gap);
    a.cpu_sum += Rounded(r.wall_time_s);
    a.value_sum += Rounded(r.eval_value);
  }
  std::sort(order.begin(), order.end());
  json cells = json::array();
  for (const Key& key : order) {
    const Acc& a = groups.at(key);
    json c;
    c["instance_id"] = std::get<0>(key);
    c["scenario_tag"] = std::get<1>(key);
    c["method"] = std::get<2>(key);
    c["n_ok"] = a.ok;
    c["n_skipped"] = a.skipped;
    if (a.ok > 0) {
      c["gap_a_pct"] = Rounded(a.gap_sum / a.ok);
      c["gap_w_pct"] = Rounded(a.gap_max);
      c["cpu_mean_s"] = Rounded(a.cpu_sum / a.ok);
      c["mean_eval_value"] = Rounded(a.value_sum / a.ok);
    } else {
      c["gap_a_pct"] = nullptr;
      c["gap_w_pct"] = nullptr;
      c["cpu_mean_s"] = nullptr;
      c["mean_eval_value"] = nullptr;
    }
    cells.push_back(std::move(c));
  }
  json doc;
  doc["schema"] = "rtm.summary";
  doc["schema_version"] = 1;
  doc["cells"] = std::move(cells);
  return doc.dump(1) + "\n";
}

std::string SweepCsv(const std::vector<SweepRow>& rows) {
  std::string out =
      "axis,value,method,n,mean_objective,ci95_half_width,mean_gap_pct,"
      "mean_cpu_s,cpu_ratio_pct\n";
  for (const SweepRow& r : rows) {
    out += CsvField(r.axis) + ',' + FormatNumber(r.value) + ',' +
           CsvField(r.method) + ',' + std::to_string(r.n) + ',' +
           FormatNumber(r.mean_objective) + ',' + FormatNumber(r.ci95) + ',' +
           FormatNumber(r.mean_gap_pct) + ',' + FormatNumber(r.mean_cpu_s) +
           ',' + FormatNumber(r.cpu_ratio_pct) + '\n';
  }
  return out;
}

namespace {

void PrepareDir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir);
}

}  // namespace

void EmitReport(const std::vector<ResultRow>& rows, const std::string& dir) {
  if (rows.empty()) throw InvalidArgument("no result rows to write");
  PrepareDir(dir);
  const std::filesystem::path base(dir);
  WriteTextFile((base / "results.csv").string(), ResultsCsv(rows));
  WriteTextFile((base / "timing.csv").string(), TimingCsv(rows));
  WriteTextFile((base / "summary.json").string(), SummaryJson(rows));
}

void EmitSweep(const std::vector<SweepRow>& rows, const std::string& dir) {
  if (rows.empty()) throw InvalidArgument("no sweep rows to write");
  PrepareDir(dir);
  WriteTextFile((std::filesystem::path(dir) / "sweep.csv").string(),
                SweepCsv(rows));
}

std::vector<ResultRow> ParseResultsCsv(const std::string& text) {
  const auto records = ParseCsv(text);
  if (records.empty()) throw ParseError("results CSV is empty");
  constexpr size_t kColumns = 12;
  if (records[0].size() != kColumns || records[0][0] != "instance_id") {
    throw ParseError("results CSV has an unexpected header");
  }
  std::vector<ResultRow> rows;
  for (size_t k = 1; k < records.size(); ++k) {
    const auto& f = records[k];
    if (f.size() != kColumns) {
      throw ParseError("results CSV line " + std::to_string(k + 1) + " has " +
                       std::to_string(f.size()) + " fields");
    }
    ResultRow r;
    r.instance_id = f[0];
    r.replication = static_cast<int>(ParseDouble(f[1], "replication"));
    r.scenario_tag = f[2];
    r.method = f[3];
    r.ok = f[4] == "ok";
    if (r.ok) {
      r.solver_objective = ParseDouble(f[5], "solver_objective");
      r.exact_value = ParseDouble(f[6], "exact_value");
      r.eval_value = ParseDouble(f[7], "eval_value");
      r.eval_method = f[8];
      r.eval_samples = static_cast<int64_t>(ParseDouble(f[9], "eval_samples"));
      r.gap_to_best_pct = ParseDouble(f[10], "gap_to_best_pct");
    }
    r.note = f[11];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace rtm
