#ifndef RTM_SOLVERS_H_
#define RTM_SOLVERS_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "rtm/evaluation.h"
#include "rtm/instance.h"

namespace rtm {

enum class Strategy { kGreedy, kLocalSearch, kExactTiny };

const char* StrategyName(Strategy s);
Strategy ParseStrategy(const std::string& name);

// Exhaustive methods refuse instances with more feasible recommendations.
inline constexpr int64_t kDefaultEnumerationBudget = 10'000'000;

struct SolverConfig {
  double tau = 0.01;
  Strategy strategy = Strategy::kLocalSearch;
  // Improving moves accepted per local search run.
  int ls_max_iters = 100'000;
  // Number of local search runs; runs after the first restart from the best
  // solution with 20% of its recommendations removed.
  int multistart_count = 4;
  int saa_samples = 1000;
  uint64_t seed = 0;
  double empty_epsilon = kDefaultEmptyEpsilon;
  int64_t enumeration_budget = kDefaultEnumerationBudget;
  // Frank-Wolfe certificate on the continuous relaxation of the surrogate.
  bool frank_wolfe_bound = false;
  int frank_wolfe_iters = 100;
  double time_limit_seconds = 120.0;
};

// Throws InvalidArgument on nonpositive tau or budgets.
void ValidateSolverConfig(const SolverConfig& cfg);

struct SolveReport {
  Recommendation rec;
  // Value of the objective the method maximizes: linear weights for
  // DAP/NPP, ranked-slot value for homog_exact, surrogate for the
  // log-sum-exp solver, in-sample average for SAA, expected utility for
  // brute_force.
  double solver_objective = 0.0;
  // Expected utility of `rec` under the instance's own probabilities.
  double exact_value = 0.0;
  double wall_time = 0.0;
  std::string method;
  int64_t iterations = 0;
  std::optional<double> upper_bound;
  // The method proved `rec` optimal for its own objective.
  bool certified_optimal = false;
  bool hit_time_limit = false;
};

// max sum p_ij u_ij x_ij, exact via min-cost flow.
SolveReport SolveDap(const Instance& instance);

// Nearby-priority policy: max sum (M - d_ij) x_ij with M = max d + 1.
SolveReport SolveNpp(const Instance& instance);

// Exact optimum when all p_ij are equal: demand i's r-th ranked supply is
// worth p (1 - p)^(r-1) u_ij, so slots r = 1..theta become a bipartite
// assignment whose optimum sorts every demand's supplies.
SolveReport SolveHomogeneousExact(const Instance& instance);

// Maximizes tau * sum_i log sum_j exp(u_ij / tau) p_ij x_ij.
SolveReport SolveSurrogate(const Instance& instance, const SolverConfig& cfg);

// Maximizes the sample-average utility over `scenarios`.
SolveReport SolveSaa(const Instance& instance, const ScenarioSet& scenarios,
                     const SolverConfig& cfg);

// Same, drawing cfg.saa_samples independent scenarios from cfg.seed.
SolveReport SolveSaa(const Instance& instance, const SolverConfig& cfg);

// Exhaustive search for the maximizer of expected utility.
SolveReport BruteForceOpt(const Instance& instance,
                          int64_t budget = kDefaultEnumerationBudget);

// Dispatches on a method tag: dap, npp, homog_exact, surrogate, saa or
// brute_force. Throws InvalidArgument for unknown tags and for methods that
// do not apply to the instance, BudgetExceeded for oversized enumerations.
SolveReport SolveMethod(const Instance& instance, const std::string& method,
                        const SolverConfig& cfg);

// Number of feasible recommendations (each supply to one demand or none,
// caps respected). Returned as double; it overflows integers quickly.
double CountFeasibleRecommendations(int num_demands, int num_supplies,
                                    int theta);

// Calls `visit` for every feasible recommendation. Supplies are assigned in
// ascending order, each trying demands ascending and then "none".
void ForEachFeasibleRecommendation(
    const Instance& instance,
    const std::function<void(const Recommendation&)>& visit);

// Frank-Wolfe upper bound on the surrogate over the relaxed polytope
// {0 <= x <= 1, row sums <= theta, column sums <= 1}, started at `start`.
double SurrogateRelaxationBound(const Instance& instance,
                                const Recommendation& start, double tau,
                                double empty_epsilon, int iterations);

}  // namespace rtm

#endif  // RTM_SOLVERS_H_
