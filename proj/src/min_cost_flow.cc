#include "rtm/min_cost_flow.h"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <utility>

#include "rtm/errors.h"

namespace rtm {
namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

MinCostFlow::MinCostFlow(int num_nodes, double tolerance)
    : num_nodes_(num_nodes),
      tolerance_(tolerance),
      adjacency_(num_nodes),
      potential_(num_nodes, 0.0) {}

int MinCostFlow::AddArc(int from, int to, int capacity, double cost) {
  const int id = static_cast<int>(arcs_.size());
  arcs_.push_back({to, capacity, 0, cost});
  arcs_.push_back({from, 0, 0, -cost});
  adjacency_[from].push_back(id);
  adjacency_[to].push_back(id + 1);
  return id;
}

// Bellman-Ford (queue based) from the source over arcs with residual capacity.
// Handles the negative arc costs of maximization problems.
void MinCostFlow::InitPotentials(int source) {
  std::vector<double> dist(num_nodes_, kInf);
  std::vector<char> queued(num_nodes_, 0);
  std::deque<int> queue;
  dist[source] = 0.0;
  queue.push_back(source);
  queued[source] = 1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    queued[v] = 0;
    for (int id : adjacency_[v]) {
      const Arc& a = arcs_[id];
      if (a.capacity - a.flow <= 0) continue;
      const double nd = dist[v] + a.cost;
      if (nd < dist[a.to] - tolerance_) {
        dist[a.to] = nd;
        if (!queued[a.to]) {
          queued[a.to] = 1;
          queue.push_back(a.to);
        }
      }
    }
  }
  for (int v = 0; v < num_nodes_; ++v) {
    potential_[v] = dist[v] == kInf ? 0.0 : dist[v];
  }
}

MinCostFlow::Result MinCostFlow::Solve(int source, int sink,
                                       bool stop_at_nonnegative) {
  Result result;
  InitPotentials(source);
  std::vector<double> dist(num_nodes_);
  std::vector<int> via(num_nodes_);
  using Entry = std::pair<double, int>;
  while (true) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(via.begin(), via.end(), -1);
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
      const auto [d, v] = heap.top();
      heap.pop();
      if (d > dist[v]) continue;
      for (int id : adjacency_[v]) {
        const Arc& a = arcs_[id];
        if (a.capacity - a.flow <= 0) continue;
        // Reduced costs are nonnegative up to rounding.
        const double reduced =
            std::max(0.0, a.cost + potential_[v] - potential_[a.to]);
        const double nd = d + reduced;
        if (nd < dist[a.to]) {
          dist[a.to] = nd;
          via[a.to] = id;
          heap.emplace(nd, a.to);
        }
      }
    }
    if (dist[sink] == kInf) break;
    const double path_cost = dist[sink] + potential_[sink] - potential_[source];
    if (stop_at_nonnegative && path_cost >= -tolerance_) break;

    int bottleneck = std::numeric_limits<int>::max();
    for (int v = sink; v != source;) {
      const Arc& a = arcs_[via[v]];
      bottleneck = std::min(bottleneck, a.capacity - a.flow);
      v = arcs_[via[v] ^ 1].to;
    }
    for (int v = sink; v != source;) {
      const int id = via[v];
      arcs_[id].flow += bottleneck;
      arcs_[id ^ 1].flow -= bottleneck;
      result.cost += bottleneck * arcs_[id].cost;
      v = arcs_[id ^ 1].to;
    }
    result.flow += bottleneck;
    ++result.augmentations;
    for (int v = 0; v < num_nodes_; ++v) {
      if (dist[v] < kInf) potential_[v] += dist[v];
    }
  }
  return result;
}

BMatching MaxWeightBMatching(int num_left, int num_right,
                             std::span<const double> weights,
                             std::span<const int> left_caps,
                             double tolerance) {
  if (static_cast<int>(weights.size()) != num_left * num_right ||
      static_cast<int>(left_caps.size()) != num_left) {
    throw InvalidArgument("b-matching weights or caps have the wrong size");
  }
  // Nodes: source, left nodes, right nodes, sink.
  const int source = 0;
  const int sink = 1 + num_left + num_right;
  MinCostFlow flow(sink + 1, tolerance);
  for (int l = 0; l < num_left; ++l) {
    if (left_caps[l] > 0) flow.AddArc(source, 1 + l, left_caps[l], 0.0);
  }
  std::vector<std::pair<int, int>> pair_arcs;  // (arc id, l * num_right + r)
  for (int l = 0; l < num_left; ++l) {
    if (left_caps[l] <= 0) continue;
    for (int r = 0; r < num_right; ++r) {
      const double w = weights[static_cast<size_t>(l) * num_right + r];
      if (w > tolerance) {
        pair_arcs.emplace_back(flow.AddArc(1 + l, 1 + num_left + r, 1, -w),
                               l * num_right + r);
      }
    }
  }
  for (int r = 0; r < num_right; ++r) {
    flow.AddArc(1 + num_left + r, sink, 1, 0.0);
  }
  const MinCostFlow::Result res = flow.Solve(source, sink, true);

  BMatching out;
  out.assigned.resize(num_left);
  out.augmentations = res.augmentations;
  for (const auto& [arc, cell] : pair_arcs) {
    if (flow.Flow(arc) > 0) {
      const int l = cell / num_right;
      const int r = cell % num_right;
      out.assigned[l].push_back(r);
      out.weight += weights[cell];
    }
  }
  return out;
}

}  // namespace rtm
