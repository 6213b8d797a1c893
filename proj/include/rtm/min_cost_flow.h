#ifndef RTM_MIN_COST_FLOW_H_
#define RTM_MIN_COST_FLOW_H_

#include <span>
#include <vector>

namespace rtm {

// Successive shortest paths with Johnson potentials on a network with real
// costs and integer capacities. Costs within `tolerance` of zero are treated
// as zero; arcs are scanned in insertion order so results are reproducible.
class MinCostFlow {
 public:
  struct Result {
    int flow = 0;
    double cost = 0.0;
    int augmentations = 0;
  };

  explicit MinCostFlow(int num_nodes, double tolerance = 1e-9);

  // Returns the arc id.
  int AddArc(int from, int to, int capacity, double cost);

  // Sends flow from source to sink along cheapest paths. When
  // `stop_at_nonnegative` is set, augmentation stops as soon as the cheapest
  // path costs >= -tolerance, which yields a minimum-cost flow of any value.
  Result Solve(int source, int sink, bool stop_at_nonnegative);

  int Flow(int arc) const { return arcs_[arc].flow; }

 private:
  struct Arc {
    int to;
    int capacity;
    int flow;
    double cost;
  };

  void InitPotentials(int source);

  int num_nodes_;
  double tolerance_;
  std::vector<Arc> arcs_;  // arc 2k is forward, 2k+1 its reverse
  std::vector<std::vector<int>> adjacency_;
  std::vector<double> potential_;
};

// Maximum-weight b-matching on a complete bipartite graph: left node l may
// take up to left_caps[l] right nodes, each right node at most one left node.
// Pairs with weight <= tolerance are never used.
struct BMatching {
  std::vector<std::vector<int>> assigned;  // right nodes per left node
  double weight = 0.0;
  int augmentations = 0;
};

// `weights` is row-major, left x right.
BMatching MaxWeightBMatching(int num_left, int num_right,
                             std::span<const double> weights,
                             std::span<const int> left_caps,
                             double tolerance = 1e-9);

}  // namespace rtm

#endif  // RTM_MIN_COST_FLOW_H_
