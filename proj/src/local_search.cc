#include "local_search.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <utility>

#include "rtm/errors.h"
#include "rtm/rng.h"

namespace rtm::internal {
namespace {

constexpr double kRelImprove = 1e-10;
constexpr double kRestartFraction = 0.2;
// The clock is read once per this many objective evaluations.
constexpr int64_t kClockStride = 256;

void Erase(std::vector<int>& list, int j) {
  list.erase(std::find(list.begin(), list.end(), j));
}

}  // namespace

Recommendation SearchState::ToRecommendation() const {
  Recommendation rec;
  rec.lists = lists;
  return rec.Canonical();
}

LocalSearch::LocalSearch(const Instance& instance,
                         const DemandObjective& objective,
                         const Deadline& deadline)
    : instance_(instance), objective_(objective), deadline_(deadline) {}

double LocalSearch::Eval(int demand, std::span<const int> list) {
  if (++evals_ % kClockStride == 0 && deadline_.Expired()) {
    hit_time_limit_ = true;
  }
  return objective_.Value(demand, list);
}

bool LocalSearch::Improves(double gain, double total) const {
  return gain > kRelImprove * std::max(1.0, std::abs(total));
}

void LocalSearch::Recompute(SearchState& st, int demand) {
  const double v = Eval(demand, st.lists[demand]);
  st.total += v - st.value[demand];
  st.value[demand] = v;
}

SearchState LocalSearch::FromRecommendation(const Recommendation& rec) const {
  SearchState st;
  st.lists = rec.lists;
  st.lists.resize(instance_.num_demands);
  st.owner.assign(instance_.num_supplies, -1);
  st.value.resize(instance_.num_demands);
  for (int i = 0; i < instance_.num_demands; ++i) {
    for (int j : st.lists[i]) st.owner[j] = i;
    st.value[i] = objective_.Value(i, st.lists[i]);
    st.total += st.value[i];
  }
  return st;
}

void LocalSearch::Greedy(SearchState& st) {
  struct Cand {
    double gain;
    int demand;
    int supply;
    int64_t version;
  };
  // Max-heap on gain; among equal gains the lower (demand, supply) first.
  auto worse = [](const Cand& a, const Cand& b) {
    if (a.gain != b.gain) return a.gain < b.gain;
    if (a.demand != b.demand) return a.demand > b.demand;
    return a.supply > b.supply;
  };
  std::priority_queue<Cand, std::vector<Cand>, decltype(worse)> heap(worse);
  std::vector<int64_t> version(instance_.num_demands, 0);
  const int theta = instance_.theta;

  auto gain_of = [&](int i, int j) {
    scratch_ = st.lists[i];
    scratch_.push_back(j);
    return Eval(i, scratch_) - st.value[i];
  };
  for (int i = 0; i < instance_.num_demands; ++i) {
    if (static_cast<int>(st.lists[i].size()) >= theta) continue;
    for (int j = 0; j < instance_.num_supplies; ++j) {
      if (st.owner[j] >= 0) continue;
      heap.push({gain_of(i, j), i, j, 0});
    }
  }
  while (!heap.empty() && !hit_time_limit_) {
    const Cand c = heap.top();
    heap.pop();
    if (st.owner[c.supply] >= 0 ||
        static_cast<int>(st.lists[c.demand].size()) >= theta) {
      continue;
    }
    if (c.version != version[c.demand]) {
      heap.push({gain_of(c.demand, c.supply), c.demand, c.supply,
                 version[c.demand]});
      continue;
    }
    if (!Improves(c.gain, st.total)) break;
    st.lists[c.demand].push_back(c.supply);
    st.owner[c.supply] = c.demand;
    Recompute(st, c.demand);
    ++version[c.demand];
  }
}

bool LocalSearch::TryInsert(SearchState& st) {
  for (int j = 0; j < instance_.num_supplies; ++j) {
    if (st.owner[j] >= 0) continue;
    for (int i = 0; i < instance_.num_demands; ++i) {
      if (static_cast<int>(st.lists[i].size()) >= instance_.theta) continue;
      scratch_ = st.lists[i];
      scratch_.push_back(j);
      const double v = Eval(i, scratch_);
      if (Improves(v - st.value[i], st.total)) {
        st.lists[i] = scratch_;
        st.owner[j] = i;
        st.total += v - st.value[i];
        st.value[i] = v;
        return true;
      }
    }
  }
  return false;
}

bool LocalSearch::TryTransfer(SearchState& st) {
  for (int j = 0; j < instance_.num_supplies; ++j) {
    const int from = st.owner[j];
    if (from < 0) continue;
    scratch_ = st.lists[from];
    Erase(scratch_, j);
    const std::vector<int> reduced = scratch_;
    const double v_from = Eval(from, reduced);
    for (int to = 0; to < instance_.num_demands; ++to) {
      if (to == from ||
          static_cast<int>(st.lists[to].size()) >= instance_.theta) {
        continue;
      }
      scratch_ = st.lists[to];
      scratch_.push_back(j);
      const double v_to = Eval(to, scratch_);
      const double gain = v_from - st.value[from] + v_to - st.value[to];
      if (Improves(gain, st.total)) {
        st.lists[from] = reduced;
        st.lists[to] = scratch_;
        st.owner[j] = to;
        st.total += gain;
        st.value[from] = v_from;
        st.value[to] = v_to;
        return true;
      }
    }
  }
  return false;
}

// Exchanges an assigned supply j of demand i with supply k, which is either
// unassigned (replacement) or assigned to another demand.
bool LocalSearch::TrySwap(SearchState& st) {
  std::vector<int> list_i;
  for (int j = 0; j < instance_.num_supplies; ++j) {
    const int i = st.owner[j];
    if (i < 0) continue;
    for (int k = 0; k < instance_.num_supplies; ++k) {
      const int h = st.owner[k];
      if (k == j || h == i) continue;
      // Pairs of assigned supplies are visited once, from the lower index.
      if (h >= 0 && k < j) continue;
      list_i = st.lists[i];
      *std::find(list_i.begin(), list_i.end(), j) = k;
      const double v_i = Eval(i, list_i);
      double gain = v_i - st.value[i];
      double v_h = 0.0;
      if (h >= 0) {
        scratch_ = st.lists[h];
        *std::find(scratch_.begin(), scratch_.end(), k) = j;
        v_h = Eval(h, scratch_);
        gain += v_h - st.value[h];
      }
      if (Improves(gain, st.total)) {
        st.lists[i] = list_i;
        st.owner[k] = i;
        st.owner[j] = h;
        st.value[i] = v_i;
        if (h >= 0) {
          st.lists[h] = scratch_;
          st.value[h] = v_h;
        }
        st.total += gain;
        return true;
      }
    }
  }
  return false;
}

bool LocalSearch::TryDelete(SearchState& st) {
  for (int j = 0; j < instance_.num_supplies; ++j) {
    const int i = st.owner[j];
    if (i < 0) continue;
    scratch_ = st.lists[i];
    Erase(scratch_, j);
    const double v = Eval(i, scratch_);
    if (Improves(v - st.value[i], st.total)) {
      st.lists[i] = scratch_;
      st.owner[j] = -1;
      st.total += v - st.value[i];
      st.value[i] = v;
      return true;
    }
  }
  return false;
}

void LocalSearch::Improve(SearchState& st, int max_moves) {
  for (int made = 0; made < max_moves && !hit_time_limit_; ++made) {
    if (!(TryInsert(st) || TryTransfer(st) || TrySwap(st) || TryDelete(st))) {
      return;
    }
    ++moves_;
  }
}

SearchState LocalSearch::Run(const SolverConfig& cfg) {
  SearchState best = FromRecommendation(Recommendation::Empty(
      instance_.num_demands));
  Greedy(best);
  if (cfg.strategy == Strategy::kGreedy) return best;
  Improve(best, cfg.ls_max_iters);

  for (int restart = 1; restart < cfg.multistart_count && !hit_time_limit_;
       ++restart) {
    std::vector<std::pair<int, int>> assigned;  // (demand, supply)
    for (int j = 0; j < instance_.num_supplies; ++j) {
      if (best.owner[j] >= 0) assigned.emplace_back(best.owner[j], j);
    }
    if (assigned.empty()) break;
    Rng rng(DeriveSeed(cfg.seed, "multistart", restart));
    for (size_t k = assigned.size(); k > 1; --k) {
      std::swap(assigned[k - 1], assigned[rng.UniformInt(k)]);
    }
    const size_t drop = static_cast<size_t>(
        std::ceil(kRestartFraction * static_cast<double>(assigned.size())));
    SearchState st = best;
    for (size_t k = 0; k < drop; ++k) {
      const auto [i, j] = assigned[k];
      Erase(st.lists[i], j);
      st.owner[j] = -1;
    }
    for (int i = 0; i < instance_.num_demands; ++i) Recompute(st, i);
    Greedy(st);
    Improve(st, cfg.ls_max_iters);
    if (Improves(st.total - best.total, best.total)) best = std::move(st);
  }
  return best;
}

SearchState LocalSearch::Exhaustive(int64_t budget) {
  const double count = CountFeasibleRecommendations(
      instance_.num_demands, instance_.num_supplies, instance_.theta);
  if (count > static_cast<double>(budget)) {
    throw BudgetExceeded("instance has " + std::to_string(count) +
                         " feasible recommendations, budget is " +
                         std::to_string(budget));
  }
  Recommendation best_rec = Recommendation::Empty(instance_.num_demands);
  double best_total = -std::numeric_limits<double>::infinity();
  ForEachFeasibleRecommendation(instance_, [&](const Recommendation& rec) {
    double total = 0.0;
    for (int i = 0; i < instance_.num_demands; ++i) {
      total += objective_.Value(i, rec.lists[i]);
    }
    if (total > best_total) {
      best_total = total;
      best_rec = rec;
    }
  });
  return FromRecommendation(best_rec);
}

}  // namespace rtm::internal
