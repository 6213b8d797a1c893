#include "rtm/solvers.h"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "local_search.h"
#include "rtm/errors.h"
#include "rtm/min_cost_flow.h"

namespace rtm {
namespace {

using internal::Deadline;
using internal::DemandObjective;
using internal::LocalSearch;
using internal::SearchState;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

class SurrogateObjective : public DemandObjective {
 public:
  SurrogateObjective(const Instance& instance, double tau, double eps)
      : instance_(instance), tau_(tau), eps_(eps) {}
  double Value(int demand, std::span<const int> list) const override {
    return SurrogateDemandValue(instance_, demand, list, tau_, eps_);
  }

 private:
  const Instance& instance_;
  double tau_;
  double eps_;
};

class ExpectedObjective : public DemandObjective {
 public:
  explicit ExpectedObjective(const Instance& instance) : instance_(instance) {}
  double Value(int demand, std::span<const int> list) const override {
    return ExactDemandValue(instance_, demand, list);
  }

 private:
  const Instance& instance_;
};

// Sample average of the best accepted utility: supplies are visited by
// descending utility and each is credited with the samples it newly covers.
class SampleAverageObjective : public DemandObjective {
 public:
  SampleAverageObjective(const Instance& instance, const ScenarioSet& set)
      : instance_(instance), set_(set), covered_(set.words_per_cell()) {}

  double Value(int demand, std::span<const int> list) const override {
    if (list.empty() || set_.sample_count() == 0) return 0.0;
    ranked_.assign(list.begin(), list.end());
    std::sort(ranked_.begin(), ranked_.end(), [&](int a, int b) {
      const double ua = instance_.utilities(demand, a);
      const double ub = instance_.utilities(demand, b);
      return ua != ub ? ua > ub : a < b;
    });
    std::fill(covered_.begin(), covered_.end(), 0);
    double sum = 0.0;
    for (int j : ranked_) {
      const std::span<const uint64_t> words = set_.Words(demand, j);
      int64_t fresh = 0;
      for (size_t w = 0; w < words.size(); ++w) {
        fresh += std::popcount(words[w] & ~covered_[w]);
        covered_[w] |= words[w];
      }
      sum += instance_.utilities(demand, j) * static_cast<double>(fresh);
    }
    return sum / set_.sample_count();
  }

 private:
  const Instance& instance_;
  const ScenarioSet& set_;
  mutable std::vector<uint64_t> covered_;
  mutable std::vector<int> ranked_;
};

// Adding a supply with p > 0 always raises the surrogate, but once its
// utility trails the list's best by a few tau the gain underflows and the
// search sees a tie. Such supplies are inserted here in exact-arithmetic
// order: the gain of (i, j) is increasing in z_ij - LSE_i.
void FillBackups(const Instance& instance, double tau, double eps,
                 Recommendation& rec) {
  const int nd = instance.num_demands;
  const int ns = instance.num_supplies;
  std::vector<char> used(ns, 0);
  for (const auto& list : rec.lists) {
    for (int j : list) used[j] = 1;
  }
  auto z = [&](int i, int j) {
    return instance.utilities(i, j) / tau +
           std::log(instance.accept_prob(i, j));
  };
  std::vector<double> lse(nd);
  for (int i = 0; i < nd; ++i) {
    lse[i] = SurrogateDemandValue(instance, i, rec.lists[i], tau, eps) / tau;
  }
  while (true) {
    int best_i = -1;
    int best_j = -1;
    double best_key = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < nd; ++i) {
      if (static_cast<int>(rec.lists[i].size()) >= instance.theta) continue;
      for (int j = 0; j < ns; ++j) {
        if (used[j] || instance.accept_prob(i, j) <= 0.0) continue;
        const double key = z(i, j) - lse[i];
        if (key > best_key) {
          best_key = key;
          best_i = i;
          best_j = j;
        }
      }
    }
    if (best_i < 0) break;
    rec.lists[best_i].push_back(best_j);
    used[best_j] = 1;
    lse[best_i] =
        SurrogateDemandValue(instance, best_i, rec.lists[best_i], tau, eps) /
        tau;
  }
  rec = rec.Canonical();
}

// Solves max sum w_ij x_ij over the recommendation polytope.
SolveReport SolveLinear(const Instance& instance, const std::vector<double>& w,
                        const char* method) {
  Timer timer;
  const std::vector<int> caps(instance.num_demands, instance.theta);
  const BMatching m = MaxWeightBMatching(instance.num_demands,
                                         instance.num_supplies, w, caps);
  SolveReport report;
  report.rec.lists = m.assigned;
  report.rec = report.rec.Canonical();
  report.solver_objective = m.weight;
  report.iterations = m.augmentations;
  report.method = method;
  report.certified_optimal = true;
  report.upper_bound = m.weight;
  report.exact_value = ExactExpectedUtility(instance, report.rec).total;
  report.wall_time = timer.Seconds();
  return report;
}

SolveReport FinishSearch(const Instance& instance, const SearchState& state,
                         const LocalSearch& search, const Timer& timer,
                         const char* method) {
  SolveReport report;
  report.rec = state.ToRecommendation();
  report.method = method;
  report.iterations = search.moves();
  report.hit_time_limit = search.hit_time_limit();
  report.exact_value = ExactExpectedUtility(instance, report.rec).total;
  report.wall_time = timer.Seconds();
  return report;
}

}  // namespace

const char* StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kGreedy:
      return "greedy";
    case Strategy::kLocalSearch:
      return "local_search";
    case Strategy::kExactTiny:
      return "exact_tiny";
  }
  return "unknown";
}

Strategy ParseStrategy(const std::string& name) {
  for (Strategy s :
       {Strategy::kGreedy, Strategy::kLocalSearch, Strategy::kExactTiny}) {
    if (name == StrategyName(s)) return s;
  }
  throw InvalidArgument("unknown strategy '" + name +
                        "' (expected greedy, local_search or exact_tiny)");
}

void ValidateSolverConfig(const SolverConfig& cfg) {
  if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau)) {
    throw InvalidArgument("tau must be positive, got " +
                          std::to_string(cfg.tau));
  }
  if (!(cfg.empty_epsilon > 0.0)) {
    throw InvalidArgument("empty_epsilon must be positive");
  }
  if (cfg.ls_max_iters < 0) throw InvalidArgument("ls_max_iters must be >= 0");
  if (cfg.multistart_count < 1) {
    throw InvalidArgument("multistart_count must be >= 1");
  }
  if (cfg.saa_samples < 1) throw InvalidArgument("saa_samples must be >= 1");
  if (cfg.enumeration_budget < 1) {
    throw InvalidArgument("enumeration_budget must be >= 1");
  }
  if (cfg.frank_wolfe_iters < 0) {
    throw InvalidArgument("frank_wolfe_iters must be >= 0");
  }
  if (!(cfg.time_limit_seconds > 0.0)) {
    throw InvalidArgument("time_limit_seconds must be positive");
  }
}

SolveReport SolveDap(const Instance& instance) {
  ValidateInstance(instance);
  std::vector<double> w(instance.utilities.data().size());
  for (size_t k = 0; k < w.size(); ++k) {
    w[k] = instance.utilities.data()[k] * instance.accept_prob.data()[k];
  }
  return SolveLinear(instance, w, "dap");
}

SolveReport SolveNpp(const Instance& instance) {
  ValidateInstance(instance);
  if (!instance.distances) {
    throw InvalidArgument("npp needs a distance matrix; instance '" +
                          instance.label + "' has none");
  }
  const std::vector<double>& d = instance.distances->data();
  const double big = *std::max_element(d.begin(), d.end()) + 1.0;
  std::vector<double> w(d.size());
  for (size_t k = 0; k < w.size(); ++k) w[k] = big - d[k];
  return SolveLinear(instance, w, "npp");
}

SolveReport SolveHomogeneousExact(const Instance& instance) {
  ValidateInstance(instance);
  if (!IsHomogeneous(instance)) {
    throw InvalidArgument(
        "homog_exact needs equal acceptance probabilities, got range [" +
        std::to_string(MinAcceptProb(instance)) + ", " +
        std::to_string(MaxAcceptProb(instance)) + "]");
  }
  Timer timer;
  const int nd = instance.num_demands;
  const int ns = instance.num_supplies;
  const int theta = instance.theta;
  const double p = instance.accept_prob(0, 0);
  // Left node i * theta + r is rank r + 1 of demand i.
  std::vector<double> w(static_cast<size_t>(nd) * theta * ns);
  for (int i = 0; i < nd; ++i) {
    double rank_weight = p;
    for (int r = 0; r < theta; ++r) {
      for (int j = 0; j < ns; ++j) {
        w[(static_cast<size_t>(i) * theta + r) * ns + j] =
            rank_weight * instance.utilities(i, j);
      }
      rank_weight *= 1.0 - p;
    }
  }
  const std::vector<int> caps(static_cast<size_t>(nd) * theta, 1);
  const BMatching m = MaxWeightBMatching(nd * theta, ns, w, caps);

  SolveReport report;
  report.rec = Recommendation::Empty(nd);
  for (int slot = 0; slot < nd * theta; ++slot) {
    for (int j : m.assigned[slot]) report.rec.lists[slot / theta].push_back(j);
  }
  report.rec = report.rec.Canonical();
  report.solver_objective = m.weight;
  report.upper_bound = m.weight;
  report.iterations = m.augmentations;
  report.method = "homog_exact";
  report.certified_optimal = true;
  report.exact_value = ExactExpectedUtility(instance, report.rec).total;
  report.wall_time = timer.Seconds();
  return report;
}

SolveReport SolveSurrogate(const Instance& instance, const SolverConfig& cfg) {
  ValidateInstance(instance);
  ValidateSolverConfig(cfg);
  Timer timer;
  const Deadline deadline(cfg.time_limit_seconds);
  const SurrogateObjective objective(instance, cfg.tau, cfg.empty_epsilon);
  LocalSearch search(instance, objective, deadline);
  const bool exhaustive = cfg.strategy == Strategy::kExactTiny;
  const SearchState state = exhaustive
                                ? search.Exhaustive(cfg.enumeration_budget)
                                : search.Run(cfg);
  SolveReport report =
      FinishSearch(instance, state, search, timer, "surrogate");
  FillBackups(instance, cfg.tau, cfg.empty_epsilon, report.rec);
  report.exact_value = ExactExpectedUtility(instance, report.rec).total;
  report.solver_objective =
      SurrogateValue(instance, report.rec, cfg.tau, cfg.empty_epsilon);
  report.certified_optimal = exhaustive;
  if (exhaustive) {
    report.upper_bound = report.solver_objective;
  } else if (cfg.frank_wolfe_bound) {
    report.upper_bound =
        SurrogateRelaxationBound(instance, report.rec, cfg.tau,
                                 cfg.empty_epsilon, cfg.frank_wolfe_iters);
  }
  report.wall_time = timer.Seconds();
  return report;
}

SolveReport SolveSaa(const Instance& instance, const ScenarioSet& scenarios,
                     const SolverConfig& cfg) {
  ValidateInstance(instance);
  ValidateSolverConfig(cfg);
  if (scenarios.num_demands() != instance.num_demands ||
      scenarios.num_supplies() != instance.num_supplies) {
    throw InvalidArgument("scenario set shape does not match the instance");
  }
  Timer timer;
  const Deadline deadline(cfg.time_limit_seconds);
  const SampleAverageObjective objective(instance, scenarios);
  LocalSearch search(instance, objective, deadline);
  const bool exhaustive = cfg.strategy == Strategy::kExactTiny;
  const SearchState state = exhaustive
                                ? search.Exhaustive(cfg.enumeration_budget)
                                : search.Run(cfg);
  SolveReport report = FinishSearch(instance, state, search, timer, "saa");
  report.solver_objective = ScenarioValue(instance, report.rec, scenarios).total;
  report.certified_optimal = exhaustive;
  report.wall_time = timer.Seconds();
  return report;
}

SolveReport SolveSaa(const Instance& instance, const SolverConfig& cfg) {
  const ScenarioSet scenarios = SampleScenarios(
      instance, cfg.saa_samples, DeriveSeed(cfg.seed, "saa_scenarios"));
  return SolveSaa(instance, scenarios, cfg);
}

SolveReport BruteForceOpt(const Instance& instance, int64_t budget) {
  ValidateInstance(instance);
  Timer timer;
  const Deadline deadline(std::numeric_limits<double>::max() / 4);
  const ExpectedObjective objective(instance);
  LocalSearch search(instance, objective, deadline);
  const SearchState state = search.Exhaustive(budget);
  SolveReport report =
      FinishSearch(instance, state, search, timer, "brute_force");
  report.iterations = static_cast<int64_t>(CountFeasibleRecommendations(
      instance.num_demands, instance.num_supplies, instance.theta));
  report.solver_objective = report.exact_value;
  report.upper_bound = report.exact_value;
  report.certified_optimal = true;
  return report;
}

SolveReport SolveMethod(const Instance& instance, const std::string& method,
                        const SolverConfig& cfg) {
  if (method == "dap") return SolveDap(instance);
  if (method == "npp") return SolveNpp(instance);
  if (method == "homog_exact") return SolveHomogeneousExact(instance);
  if (method == "surrogate") return SolveSurrogate(instance, cfg);
  if (method == "saa") return SolveSaa(instance, cfg);
  if (method == "brute_force") {
    return BruteForceOpt(instance, cfg.enumeration_budget);
  }
  throw InvalidArgument("unknown method '" + method +
                        "' (expected dap, npp, homog_exact, surrogate, saa "
                        "or brute_force)");
}

double CountFeasibleRecommendations(int num_demands, int num_supplies,
                                    int theta) {
  if (num_demands < 0 || num_supplies < 0 || theta < 0) {
    throw InvalidArgument("negative dimension in feasible count");
  }
  // choose[n][k] for n <= num_supplies.
  std::vector<std::vector<double>> choose(num_supplies + 1);
  for (int n = 0; n <= num_supplies; ++n) {
    choose[n].assign(n + 1, 1.0);
    for (int k = 1; k < n; ++k) {
      choose[n][k] = choose[n - 1][k - 1] + choose[n - 1][k];
    }
  }
  // ways[u]: assignments of the demands so far that use u supplies.
  std::vector<double> ways(num_supplies + 1, 0.0);
  ways[0] = 1.0;
  for (int d = 0; d < num_demands; ++d) {
    std::vector<double> next(num_supplies + 1, 0.0);
    for (int used = 0; used <= num_supplies; ++used) {
      if (ways[used] == 0.0) continue;
      const int free = num_supplies - used;
      for (int k = 0; k <= std::min(theta, free); ++k) {
        next[used + k] += ways[used] * choose[free][k];
      }
    }
    ways = std::move(next);
  }
  double total = 0.0;
  for (double w : ways) total += w;
  return total;
}

void ForEachFeasibleRecommendation(
    const Instance& instance,
    const std::function<void(const Recommendation&)>& visit) {
  Recommendation rec = Recommendation::Empty(instance.num_demands);
  const int ns = instance.num_supplies;
  const int nd = instance.num_demands;
  std::function<void(int)> place = [&](int j) {
    if (j == ns) {
      visit(rec);
      return;
    }
    for (int i = 0; i < nd; ++i) {
      if (static_cast<int>(rec.lists[i].size()) >= instance.theta) continue;
      rec.lists[i].push_back(j);
      place(j + 1);
      rec.lists[i].pop_back();
    }
    place(j + 1);
  };
  place(0);
}

}  // namespace rtm
