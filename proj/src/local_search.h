#ifndef RTM_SRC_LOCAL_SEARCH_H_
#define RTM_SRC_LOCAL_SEARCH_H_

#include <chrono>
#include <cstdint>
#include <span>
#include <vector>

#include "rtm/instance.h"
#include "rtm/solvers.h"

namespace rtm::internal {

// Objective that separates over demands: total = sum_i Value(i, S_i).
class DemandObjective {
 public:
  virtual ~DemandObjective() = default;
  virtual double Value(int demand, std::span<const int> list) const = 0;
};

class Deadline {
 public:
  explicit Deadline(double seconds)
      : end_(std::chrono::steady_clock::now() +
             std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                 std::chrono::duration<double>(seconds))) {}

  bool Expired() const { return std::chrono::steady_clock::now() >= end_; }

 private:
  std::chrono::steady_clock::time_point end_;
};

struct SearchState {
  std::vector<std::vector<int>> lists;
  std::vector<int> owner;     // supply -> demand, -1 when unassigned
  std::vector<double> value;  // per demand objective
  double total = 0.0;

  Recommendation ToRecommendation() const;
};

// Greedy construction plus first-improvement local search over the moves
// insert, transfer, swap and delete, scanned in that order. After each
// accepted move the scan restarts from the first move type.
class LocalSearch {
 public:
  LocalSearch(const Instance& instance, const DemandObjective& objective,
              const Deadline& deadline);

  SearchState FromRecommendation(const Recommendation& rec) const;

  // Lazy greedy: repeatedly applies the feasible insertion with the largest
  // positive gain. Ties go to the lower demand, then the lower supply.
  void Greedy(SearchState& state);

  // Applies improving moves until none exists, `max_moves` were made or the
  // deadline passes.
  void Improve(SearchState& state, int max_moves);

  // Greedy + Improve, then `cfg.multistart_count - 1` perturbed restarts.
  SearchState Run(const SolverConfig& cfg);

  // Exhaustive maximization; the first maximizer in enumeration order wins.
  SearchState Exhaustive(int64_t budget);

  int64_t moves() const { return moves_; }
  bool hit_time_limit() const { return hit_time_limit_; }

 private:
  double Eval(int demand, std::span<const int> list);
  bool Improves(double gain, double total) const;
  bool TryInsert(SearchState& st);
  bool TryTransfer(SearchState& st);
  bool TrySwap(SearchState& st);
  bool TryDelete(SearchState& st);
  void Recompute(SearchState& st, int demand);

  const Instance& instance_;
  const DemandObjective& objective_;
  const Deadline& deadline_;
  int64_t moves_ = 0;
  int64_t evals_ = 0;
  bool hit_time_limit_ = false;
  std::vector<int> scratch_;
};

}  // namespace rtm::internal

#endif  // RTM_SRC_LOCAL_SEARCH_H_
