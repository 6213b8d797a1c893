// Command-line front end: instance generation, solving, evaluation,
// benchmarks and bound computation. Exit status 0 on success, 1 for
// configuration errors, 2 for runtime failures.

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rtm/bench.h"
#include "rtm/bounds.h"
#include "rtm/errors.h"
#include "rtm/evaluation.h"
#include "rtm/instance.h"
#include "rtm/json_io.h"
#include "rtm/solvers.h"

namespace {

using nlohmann::json;

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

// Flags shared by the experiment subcommands.
struct ExperimentFlags {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
  std::string methods;
  std::optional<double> time_limit;
  std::optional<double> tau;
  std::optional<int> samples;
  std::optional<int> threads;
};

void AddExperimentFlags(CLI::App* cmd, ExperimentFlags& f) {
  cmd->add_option("--config", f.config, "experiment config (JSON)")
      ->required();
  cmd->add_option("--seed", f.seed, "master seed override");
  cmd->add_option("--out", f.out, "output directory override");
  cmd->add_option("--methods", f.methods, "comma-separated method list");
  cmd->add_option("--time-limit", f.time_limit, "per-solve time limit (s)");
  cmd->add_option("--tau", f.tau, "surrogate temperature");
  cmd->add_option("--samples", f.samples, "Monte Carlo evaluation samples");
  cmd->add_option("--threads", f.threads, "worker threads");
}

std::vector<std::string> SplitCommas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

rtm::ExperimentConfig LoadExperiment(const ExperimentFlags& f) {
  rtm::ExperimentConfig cfg =
      rtm::ExperimentConfigFromJson(rtm::ReadJsonFile(f.config).dump());
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (!f.methods.empty()) cfg.methods = SplitCommas(f.methods);
  if (f.time_limit) cfg.solver.time_limit_seconds = *f.time_limit;
  if (f.tau) cfg.solver.tau = *f.tau;
  if (f.samples) cfg.mc_eval_samples = *f.samples;
  if (f.threads) cfg.threads = *f.threads;
  rtm::ValidateExperimentConfig(cfg);
  return cfg;
}

void PrintSummaryTable(const std::vector<rtm::ResultRow>& rows) {
  const json summary = json::parse(rtm::SummaryJson(rows));
  std::printf("%-32s %-14s %-12s %9s %9s %10s %5s\n", "instance", "scenario",
              "method", "Gap-A(%)", "Gap-W(%)", "CPU(s)", "skip");
  for (const json& c : summary["cells"]) {
    auto num = [&](const char* key) {
      return c[key].is_null() ? std::string("-")
                              : rtm::FormatNumber(c[key].get<double>());
    };
    std::printf("%-32s %-14s %-12s %9s %9s %10s %5d\n",
                c["instance_id"].get<std::string>().c_str(),
                c["scenario_tag"].get<std::string>().c_str(),
                c["method"].get<std::string>().c_str(),
                num("gap_a_pct").c_str(), num("gap_w_pct").c_str(),
                num("cpu_mean_s").c_str(), c["n_skipped"].get<int>());
  }
}

void WriteOrPrint(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    rtm::WriteTextFile(path, text);
  }
}

rtm::Recommendation LoadRecommendation(const std::string& path) {
  const json doc = rtm::ReadJsonFile(path);
  if (doc.is_object() && doc.contains("recommendation")) {
    return rtm::RecommendationFromJson(doc.at("recommendation"));
  }
  return rtm::RecommendationFromJson(doc);
}

rtm::BoundInputs BoundInputsFromJson(const json& doc) {
  rtm::BoundInputs in;
  auto vec = [&](const char* key) {
    const json& v = doc.at(key);
    return v.is_number() ? std::vector<double>{v.get<double>()}
                         : v.get<std::vector<double>>();
  };
  for (const auto& [key, value] : doc.items()) {
    if (key == "theta") {
      in.theta = value.get<int>();
    } else if (key == "tau") {
      in.tau = value.get<double>();
    } else if (key == "num_demands") {
      in.num_demands = value.get<int>();
    } else if (key == "num_supplies") {
      in.num_supplies = value.get<int>();
    } else if (key == "a") {
      in.a = vec("a");
    } else if (key == "b") {
      in.b = vec("b");
    } else if (key == "p_lo") {
      in.p_lo = value.get<double>();
    } else if (key == "p_hi") {
      in.p_hi = value.get<double>();
    } else if (key == "allow_off_hypothesis") {
      in.allow_off_hypothesis = value.get<bool>();
    } else {
      throw rtm::InvalidArgument("unknown key '" + key + "' in bound inputs");
    }
  }
  return in;
}

// Evaluates one bound, reporting inapplicable ones instead of failing.
json TryBound(const char* name, rtm::BoundReport (*fn)(const rtm::BoundInputs&),
              const rtm::BoundInputs& in) {
  try {
    return rtm::BoundReportToJson(fn(in));
  } catch (const rtm::InvalidArgument& e) {
    return json{{"error", e.what()}, {"bound", name}};
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recommend-to-match solver and benchmark runner"};
  app.require_subcommand(1);

  // generate
  std::string gen_config;
  std::optional<uint64_t> gen_seed;
  std::string gen_out;
  CLI::App* generate = app.add_subcommand("generate", "generate an instance");
  generate->add_option("--config", gen_config, "generator config (JSON)")
      ->required();
  generate->add_option("--seed", gen_seed, "seed override");
  generate->add_option("--out", gen_out, "instance file (default stdout)");

  // solve
  std::string solve_instance;
  std::string solve_method = "surrogate";
  std::string solve_strategy;
  std::optional<double> solve_tau;
  std::optional<double> solve_time_limit;
  std::optional<int> solve_samples;
  std::optional<uint64_t> solve_seed;
  bool solve_fw = false;
  std::string solve_out;
  CLI::App* solve = app.add_subcommand("solve", "solve one instance");
  solve->add_option("--instance", solve_instance, "instance file")->required();
  solve->add_option("--method", solve_method,
                    "dap, npp, homog_exact, surrogate, saa or brute_force");
  solve->add_option("--strategy", solve_strategy,
                    "greedy, local_search or exact_tiny");
  solve->add_option("--tau", solve_tau, "surrogate temperature");
  solve->add_option("--time-limit", solve_time_limit, "time limit (s)");
  solve->add_option("--samples", solve_samples, "SAA scenarios");
  solve->add_option("--seed", solve_seed, "solver seed");
  solve->add_flag("--frank-wolfe", solve_fw,
                  "attach a relaxation upper bound (surrogate only)");
  solve->add_option("--out", solve_out, "report file (default stdout)");

  // evaluate
  std::string eval_instance;
  std::string eval_rec;
  int eval_samples = 0;
  uint64_t eval_seed = 0;
  double eval_rho = 0.0;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "expected utility of a recommendation");
  evaluate->add_option("--instance", eval_instance, "instance file")
      ->required();
  evaluate->add_option("--rec", eval_rec,
                       "recommendation or solve report (JSON)")
      ->required();
  evaluate->add_option("--samples", eval_samples,
                       "also run Monte Carlo with this many samples");
  evaluate->add_option("--seed", eval_seed, "Monte Carlo seed");
  evaluate->add_option("--rho", eval_rho,
                       "supplier common-factor correlation for Monte Carlo");

  ExperimentFlags bench_flags;
  CLI::App* bench = app.add_subcommand("bench", "run a benchmark grid");
  AddExperimentFlags(bench, bench_flags);
  ExperimentFlags sweep_flags;
  CLI::App* sweep = app.add_subcommand("sweep", "run a sensitivity sweep");
  AddExperimentFlags(sweep, sweep_flags);
  ExperimentFlags oos_flags;
  CLI::App* oos = app.add_subcommand("oos", "out-of-sample comparison");
  AddExperimentFlags(oos, oos_flags);

  // bounds
  std::string bounds_config;
  std::string bounds_instance;
  std::optional<double> bounds_tau;
  bool bounds_off = false;
  bool bounds_observed = false;
  CLI::App* bounds = app.add_subcommand("bounds", "approximation-gap bounds");
  bounds->add_option("--config", bounds_config, "bound inputs (JSON)");
  bounds->add_option("--instance", bounds_instance,
                     "derive inputs from an instance file");
  bounds->add_option("--tau", bounds_tau, "surrogate temperature");
  bounds->add_flag("--allow-off-hypothesis", bounds_off,
                   "evaluate formulas outside their hypotheses");
  bounds->add_flag("--observed", bounds_observed,
                   "with --instance: also report observed gaps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (generate->parsed()) {
      rtm::GenConfig cfg = rtm::GenConfigFromJson(rtm::ReadJsonFile(gen_config));
      if (gen_seed) cfg.seed = *gen_seed;
      const rtm::Instance inst = rtm::Generate(cfg);
      WriteOrPrint(gen_out, rtm::InstanceToJson(inst) + "\n");
    } else if (solve->parsed()) {
      const rtm::Instance inst = rtm::LoadInstance(solve_instance);
      rtm::SolverConfig cfg;
      if (!solve_strategy.empty()) {
        cfg.strategy = rtm::ParseStrategy(solve_strategy);
      }
      if (solve_tau) cfg.tau = *solve_tau;
      if (solve_time_limit) cfg.time_limit_seconds = *solve_time_limit;
      if (solve_samples) cfg.saa_samples = *solve_samples;
      if (solve_seed) cfg.seed = *solve_seed;
      cfg.frank_wolfe_bound = solve_fw;
      rtm::ValidateSolverConfig(cfg);
      const rtm::SolveReport report =
          rtm::SolveMethod(inst, solve_method, cfg);
      WriteOrPrint(solve_out, rtm::SolveReportToJson(report).dump(1) + "\n");
    } else if (evaluate->parsed()) {
      const rtm::Instance inst = rtm::LoadInstance(eval_instance);
      const rtm::Recommendation rec = LoadRecommendation(eval_rec);
      rtm::CheckRecommendation(inst, rec);
      json out;
      out["exact"] = rtm::EvaluationToJson(rtm::ExactExpectedUtility(inst, rec));
      if (eval_samples > 0) {
        out["monte_carlo"] = rtm::EvaluationToJson(rtm::MonteCarloValue(
            inst, rec, eval_samples, eval_seed,
            rtm::Correlation::SupplierCommonFactor(eval_rho)));
      }
      std::cout << out.dump(1) << "\n";
    } else if (bench->parsed()) {
      const rtm::ExperimentConfig cfg = LoadExperiment(bench_flags);
      const auto rows = rtm::RunBenchmark(cfg);
      rtm::EmitReport(rows, cfg.output_dir);
      PrintSummaryTable(rows);
    } else if (sweep->parsed()) {
      const rtm::ExperimentConfig cfg = LoadExperiment(sweep_flags);
      std::vector<rtm::ResultRow> rows;
      const auto table = rtm::RunSensitivity(cfg, &rows);
      rtm::EmitReport(rows, cfg.output_dir);
      rtm::EmitSweep(table, cfg.output_dir);
      std::cout << rtm::SweepCsv(table);
    } else if (oos->parsed()) {
      const rtm::ExperimentConfig cfg = LoadExperiment(oos_flags);
      const auto rows = rtm::RunOutOfSample(cfg);
      rtm::EmitReport(rows, cfg.output_dir);
      PrintSummaryTable(rows);
    } else if (bounds->parsed()) {
      if (bounds_config.empty() == bounds_instance.empty()) {
        throw rtm::InvalidArgument(
            "bounds needs exactly one of --config or --instance");
      }
      std::optional<rtm::Instance> inst;
      rtm::BoundInputs in;
      if (!bounds_config.empty()) {
        const json doc = rtm::ReadJsonFile(bounds_config);
        try {
          in = BoundInputsFromJson(doc);
        } catch (const json::exception& e) {
          throw rtm::InvalidArgument(std::string("bound inputs: ") + e.what());
        }
      } else {
        inst = rtm::LoadInstance(bounds_instance);
        in = rtm::BoundInputsFromInstance(*inst, bounds_tau.value_or(0.01));
      }
      if (bounds_tau) in.tau = *bounds_tau;
      if (bounds_off) in.allow_off_hypothesis = true;
      rtm::ValidateBoundInputs(in);
      json out;
      out["theorem1"] = TryBound("theorem1", rtm::Theorem1Bound, in);
      out["theorem2"] = TryBound("theorem2", rtm::Theorem2Bound, in);
      out["correlated"] = TryBound("correlated", rtm::CorrelatedBound, in);
      if (bounds_observed) {
        if (!inst) {
          throw rtm::InvalidArgument("--observed needs --instance");
        }
        const rtm::DapGap dap = rtm::DapGapCertificate(*inst);
        rtm::SolverConfig cfg;
        cfg.tau = in.tau;
        const double count = rtm::CountFeasibleRecommendations(
            inst->num_demands, inst->num_supplies, inst->theta);
        if (count <= static_cast<double>(cfg.enumeration_budget)) {
          cfg.strategy = rtm::Strategy::kExactTiny;
        }
        const rtm::SolveReport sur = rtm::SolveSurrogate(*inst, cfg);
        const double ref = dap.reference_value;
        out["observed"] = {
            {"reference_method", dap.reference_method},
            {"reference_value", ref},
            {"dap_gap", dap.gap},
            {"surrogate_strategy", rtm::StrategyName(cfg.strategy)},
            {"surrogate_gap",
             ref > 0.0 ? std::max(0.0, (ref - sur.exact_value) / ref) : 0.0}};
      }
      std::cout << out.dump(1) << "\n";
    }
  } catch (const rtm::InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  } catch (const rtm::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
  return 0;
}
