// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rtm/bench.h"
#include "rtm/bounds.h"
#include "rtm/evaluation.h"
#include "rtm/instance.h"
#include "rtm/rng.h"
#include "rtm/solvers.h"
#include "test_util.h"

namespace rtm {
namespace {

namespace fs = std::filesystem;
using testing::RandomHomogeneous;
using testing::RandomInstance;
using testing::RandomRecommendation;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double RelErr(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

std::string Fmt(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c);
  return buf;
}

Outcome ExactMatchesEnumeration() {
  Rng rng(1001);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int nd = 1 + rng.UniformInt(3);
    const int ns = 1 + rng.UniformInt(14);
    const Instance inst = RandomInstance(rng, nd, ns, 1 + rng.UniformInt(10),
                                         0.0, 1.0, 0.0, 1.0);
    const Recommendation rec = RandomRecommendation(rng, inst);
    worst = std::max(worst, RelErr(ExactExpectedUtility(inst, rec).total,
                                   EnumerateOutcomesValue(inst, rec).total));
  }
  return {worst <= 1e-12, Fmt("max rel err %.3g", worst)};
}

Outcome HomogeneousExactMatchesBrute() {
  Rng rng(1002);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Instance inst =
        RandomHomogeneous(rng, 1 + rng.UniformInt(3), 1 + rng.UniformInt(6),
                          1 + rng.UniformInt(2), rng.Uniform(0.05, 1.0));
    worst = std::max(worst, std::abs(SolveHomogeneousExact(inst).exact_value -
                                     BruteForceOpt(inst).exact_value));
  }
  return {worst <= 1e-9, Fmt("max abs diff %.3g", worst)};
}

Outcome HomogeneousBoundNumber() {
  BoundInputs in;
  in.theta = 4;
  in.tau = 0.01;
  in.num_demands = 10;
  in.num_supplies = 40;
  in.a = {5.0};
  in.b = std::vector<double>{10.0};
  in.p_lo = in.p_hi = 0.8;
  const double v = Theorem1Bound(in).gap_bound;
  return {std::abs(v - 0.1151) <= 1e-4, Fmt("bound %.6f", v)};
}

Outcome ThetaOneSurrogateExact() {
  Rng rng(1004);
  double worst = 0.0;
  SolverConfig cfg;
  cfg.strategy = Strategy::kExactTiny;
  for (int t = 0; t < 100; ++t) {
    const Instance inst = RandomHomogeneous(rng, 1 + rng.UniformInt(3),
                                            1 + rng.UniformInt(4), 1,
                                            rng.Uniform(0.05, 1.0));
    worst = std::max(worst, std::abs(SolveSurrogate(inst, cfg).exact_value -
                                     BruteForceOpt(inst).exact_value));
  }
  return {worst <= 1e-9, Fmt("max abs diff %.3g", worst)};
}

Outcome HeterogeneousBoundDominates() {
  Rng rng(1005);
  SolverConfig cfg;
  cfg.strategy = Strategy::kExactTiny;
  int violations = 0;
  double max_gap = 0.0, min_slack = INFINITY;
  for (int t = 0; t < 100; ++t) {
    const int theta = 2 + rng.UniformInt(2);
    const int nd = 1 + rng.UniformInt(3);
    const int ns = 1 + rng.UniformInt(std::min(6, theta * nd));
    const Instance inst = RandomInstance(rng, nd, ns, theta, 0.4, 1.0, 0.7, 0.9);
    const double best = BruteForceOpt(inst).exact_value;
    const double got = SolveSurrogate(inst, cfg).exact_value;
    BoundInputs in = BoundInputsFromInstance(inst, cfg.tau);
    in.a = {0.4};
    in.p_lo = 0.7;
    in.p_hi = 0.9;
    const double bound = Theorem2Bound(in).gap_bound;
    const double gap = (best - got) / best;
    max_gap = std::max(max_gap, gap);
    min_slack = std::min(min_slack, bound - gap);
    if (gap > bound) ++violations;
  }
  return {violations == 0, Fmt("violations %.0f, max gap %.4f, min slack %.4f",
                               violations, max_gap, min_slack)};
}

Outcome AdversarialDapGap() {
  std::vector<double> gaps;
  for (int theta : {4, 8}) {
    const Instance inst =
        GenerateAdversarialDap(16, theta, 1.0, 1.0, 1.05, 0.9, 0);
    gaps.push_back(DapGapCertificate(inst).gap);
  }
  const bool pass = gaps[0] > 0.5 && gaps[1] > 0.5 && gaps[1] >= gaps[0];
  return {pass, Fmt("gap(theta=4) %.4f, gap(theta=8) %.4f", gaps[0], gaps[1])};
}

Outcome DeskScalePattern() {
  ExperimentConfig cfg;
  cfg.seed = 2024;
  cfg.replications = 10;
  cfg.methods = {"dap", "surrogate", "saa"};
  for (int ns : {10, 20, 40}) {
    GridCell cell;
    cell.num_demands = 10;
    cell.num_supplies = ns;
    cell.theta = 4;
    cell.prob_model = UniformProb{0.7, 0.9};
    cfg.grid.push_back(cell);
  }
  cfg.threads = 4;
  const std::vector<ResultRow> rows = RunBenchmark(cfg);
  std::map<std::pair<std::string, std::string>, std::pair<double, int>> mean;
  for (const ResultRow& r : rows) {
    if (!r.ok) continue;
    auto& m = mean[{r.instance_id, r.method}];
    m.first += r.gap_to_best_pct;
    ++m.second;
  }
  auto gap = [&](const std::string& id, const std::string& method) {
    const auto& m = mean[{id, method}];
    return m.second == 10 ? m.first / m.second : INFINITY;
  };
  bool pass = true;
  std::string detail;
  for (size_t k = 0; k < cfg.grid.size(); ++k) {
    const std::string id = InstanceId(static_cast<int>(k), cfg.grid[k]);
    const double sur = gap(id, "surrogate");
    const double dap = gap(id, "dap");
    if (cfg.grid[k].num_supplies == 40 && !(sur <= 3.0)) pass = false;
    if (cfg.grid[k].num_supplies < 40 && !(dap > sur)) pass = false;
    detail += Fmt("S%.0f: dap %.2f%% surrogate %.2f%%; ",
                  cfg.grid[k].num_supplies, dap, sur);
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

Outcome MonteCarloCalibration() {
  Rng rng(1008);
  const Instance inst = RandomInstance(rng, 2, 5, 3, 0.0, 1.0, 0.2, 0.9);
  const Recommendation rec{{{0, 1, 2}, {3, 4}}};
  const double exact = ExactExpectedUtility(inst, rec).total;
  int inside = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const Evaluation mc = MonteCarloValue(inst, rec, 100000, seed);
    if (std::abs(mc.total - exact) <= 3.0 * *mc.std_error) ++inside;
  }
  return {inside >= 99, Fmt("%.0f of 100 within 3 sigma", inside)};
}

Outcome EnvelopeProperties() {
  Rng rng(1009);
  int sandwich = 0, envelopes = 0, upper = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + rng.UniformInt(12);
    const double tau = std::exp(rng.Uniform(-5.0, 1.0));
    std::vector<double> scaled(n);
    double m = -INFINITY;
    for (int k = 0; k < n; ++k) {
      const double z = rng.Uniform(-5.0, 5.0);
      m = std::max(m, z);
      scaled[k] = z / tau;
    }
    const double v = tau * LogSumExp(scaled);
    const double slack = 1e-12 * std::max(1.0, std::abs(m));
    if (v >= m - slack && v <= m + tau * std::log(n) + slack) ++sandwich;
  }
  for (int t = 0; t < 1000; ++t) {
    const int theta = 1 + rng.UniformInt(4);
    const Instance inst = RandomInstance(rng, 1, 6, theta, 0.0, 1.0, 0.05, 1.0);
    Recommendation rec = RandomRecommendation(rng, inst);
    if (rec.lists[0].empty()) rec.lists[0].push_back(rng.UniformInt(6));
    const auto& list = rec.lists[0];
    double top = 0.0, p_lo = 1.0, p_hi = 0.0;
    for (int j : list) {
      top = std::max(top, inst.utilities(0, j));
      p_lo = std::min(p_lo, inst.accept_prob(0, j));
      p_hi = std::max(p_hi, inst.accept_prob(0, j));
    }
    const double tau = std::exp(rng.Uniform(-5.0, 0.0));
    const double q_hi = 1.0 - std::pow(1.0 - p_hi, theta);
    const double ve = ExactDemandValue(inst, 0, list);
    const double va = SurrogateDemandValue(inst, 0, list, tau);
    const double e = 1e-12;
    if (ve >= p_lo * top - e && ve <= q_hi * top + e &&
        va >= tau * std::log(p_lo) + top - e &&
        va <= tau * std::log(p_hi) + top + tau * std::log(theta) + e) {
      ++envelopes;
    }
  }
  for (int t = 0; t < 1000; ++t) {
    const Instance inst = RandomInstance(rng, 1 + rng.UniformInt(3),
                                         1 + rng.UniformInt(6),
                                         1 + rng.UniformInt(3));
    const Recommendation rec = RandomRecommendation(rng, inst);
    const double tau = std::exp(rng.Uniform(-4.0, 1.0));
    if (Corollary1Upper(inst, rec, tau) + 1e-12 >=
        EnumerateOutcomesValue(inst, rec).total) {
      ++upper;
    }
  }
  return {sandwich == 1000 && envelopes == 1000 && upper == 1000,
          Fmt("sandwich %.0f/1000, demand envelopes %.0f/1000, "
              "upper envelope %.0f/1000",
              sandwich, envelopes, upper)};
}

Outcome OutLMonotone() {
  Rng rng(1010);
  SolverConfig cfg;
  cfg.saa_samples = 100;
  int violations = 0, checks = 0;
  for (int t = 0; t < 100; ++t) {
    const Instance inst = RandomInstance(rng, 1 + rng.UniformInt(4),
                                         1 + rng.UniformInt(10),
                                         1 + rng.UniformInt(3), 0.0, 1.0, 0.0,
                                         1.0);
    cfg.seed = rng.NextU64();
    const Instance low = PerturbProbabilities(
        inst, PerturbSpec{PerturbKind::kOutL, rng.NextU64()});
    for (const char* m : {"dap", "surrogate", "saa"}) {
      const Recommendation rec = SolveMethod(inst, m, cfg).rec;
      ++checks;
      if (ExactExpectedUtility(low, rec).total >
          ExactExpectedUtility(inst, rec).total + 1e-12) {
        ++violations;
      }
    }
  }
  return {violations == 0,
          Fmt("%.0f violations in %.0f checks", violations, checks)};
}

Outcome UniformBaselineSimulation() {
  Rng rng(1011);
  const double a = 5.0, b = 10.0;
  const int draws = 1000000;
  int inside = 0, points = 0;
  double worst_z = 0.0;
  for (int theta : {1, 2, 3, 5}) {
    for (double p : {0.3, 0.8, 1.0}) {
      double sum = 0.0, sq = 0.0;
      for (int k = 0; k < draws; ++k) {
        double best = 0.0;
        for (int r = 0; r < theta; ++r) {
          const double u = rng.Uniform(a, b);
          if (rng.Uniform() < p) best = std::max(best, u);
        }
        sum += best;
        sq += best * best;
      }
      const double mean = sum / draws;
      const double se = std::sqrt(std::max(0.0, sq / draws - mean * mean) / draws);
      const double z = std::abs(UniformBaselineValue(theta, p, a, b) - mean) / se;
      worst_z = std::max(worst_z, z);
      ++points;
      if (z <= 3.0) ++inside;
    }
  }
  return {inside == points,
          Fmt("%.0f of %.0f points within 3 sigma, max z %.2f", inside, points,
              worst_z)};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome BenchDeterminism() {
  const fs::path dir = fs::temp_directory_path() / "rtm_acceptance_bench";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << R"({
  "seed": 12,
  "replications": 3,
  "methods": ["dap", "surrogate", "saa", "homog_exact"],
  "grid": [
    {"num_demands": 6, "num_supplies": 18, "theta": 3,
     "prob": {"model": "uniform", "lo": 0.7, "hi": 0.9}},
    {"num_demands": 5, "num_supplies": 10, "theta": 2,
     "utility": {"model": "case_like"}, "prob": {"model": "case_like"}}
  ],
  "saa_samples": 200,
  "threads": 2
})";
  std::string outputs[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path out = dir / ("run" + std::to_string(k));
    const std::string cmd = std::string(RTM_CLI_PATH) + " bench --config " +
                            cfg.string() + " --out " + out.string() +
                            " > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      return {false, "bench run " + std::to_string(k) + " failed"};
    }
    outputs[k] = Slurp(out / "results.csv");
  }
  fs::remove_all(dir);
  const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
  return {same, Fmt("%.0f bytes, identical %.0f", outputs[0].size(), same)};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
  double time_limit_s;  // 0 means no limit
};

}  // namespace
}  // namespace rtm

int main() {
  using rtm::Criterion;
  const std::vector<Criterion> criteria = {
      {"1 exact value equals outcome enumeration", rtm::ExactMatchesEnumeration, 10},
      {"2 ranked-slot solver equals brute force", rtm::HomogeneousExactMatchesBrute, 60},
      {"3 homogeneous gap bound at reference parameters", rtm::HomogeneousBoundNumber, 0},
      {"4 theta=1 surrogate optimum equals brute force", rtm::ThetaOneSurrogateExact, 0},
      {"5 heterogeneous gap bound dominates observed gaps", rtm::HeterogeneousBoundDominates, 120},
      {"6 direct assignment gap on adversarial family", rtm::AdversarialDapGap, 0},
      {"7 desk-scale benchmark ordering", rtm::DeskScalePattern, 0},
      {"8 Monte Carlo calibration", rtm::MonteCarloCalibration, 0},
      {"9 sandwich and envelope properties", rtm::EnvelopeProperties, 0},
      {"10 Out-L never raises exact value", rtm::OutLMonotone, 0},
      {"11 uniform baseline closed form vs simulation", rtm::UniformBaselineSimulation, 0},
      {"12 bench rerun is byte-identical", rtm::BenchDeterminism, 0},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    rtm::Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    if (c.time_limit_s > 0 && secs > c.time_limit_s) {
      out.pass = false;
      out.detail += "; over time limit";
    }
    std::printf("%s criterion %s: %s (%.2fs)\n", out.pass ? "PASS" : "FAIL",
                c.name, out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
