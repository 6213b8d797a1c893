#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "gtest/gtest.h"
#include "rtm/min_cost_flow.h"
#include "rtm/rng.h"

namespace rtm {
namespace {

// Best b-matching by trying every right node on every left node or nowhere.
double BruteBMatching(int nl, int nr, const std::vector<double>& w,
                      const std::vector<int>& caps) {
  std::vector<int> load(nl, 0);
  double best = 0.0;
  std::function<void(int, double)> step = [&](int r, double acc) {
    if (r == nr) {
      best = std::max(best, acc);
      return;
    }
    step(r + 1, acc);
    for (int l = 0; l < nl; ++l) {
      if (load[l] < caps[l]) {
        ++load[l];
        step(r + 1, acc + w[l * nr + r]);
        --load[l];
      }
    }
  };
  step(0, 0.0);
  return best;
}

TEST(MinCostFlowTest, PicksCheaperPath) {
  MinCostFlow flow(4);
  const int a = flow.AddArc(0, 1, 1, 1.0);
  const int b = flow.AddArc(0, 2, 1, 5.0);
  flow.AddArc(1, 3, 1, 1.0);
  flow.AddArc(2, 3, 1, 1.0);
  const MinCostFlow::Result r = flow.Solve(0, 3, false);
  EXPECT_EQ(r.flow, 2);
  EXPECT_DOUBLE_EQ(r.cost, 8.0);
  EXPECT_EQ(flow.Flow(a), 1);
  EXPECT_EQ(flow.Flow(b), 1);
}

TEST(MinCostFlowTest, StopsWhenPathsStopPaying) {
  MinCostFlow flow(4);
  flow.AddArc(0, 1, 1, -3.0);
  flow.AddArc(0, 2, 1, 2.0);
  flow.AddArc(1, 3, 1, 0.0);
  flow.AddArc(2, 3, 1, 0.0);
  const MinCostFlow::Result r = flow.Solve(0, 3, true);
  EXPECT_EQ(r.flow, 1);
  EXPECT_DOUBLE_EQ(r.cost, -3.0);
}

TEST(MinCostFlowTest, ReroutesThroughReverseArcs) {
  // Greedy first path 0-1-2-3 must be undone to reach flow 2.
  MinCostFlow flow(4);
  flow.AddArc(0, 1, 1, 1.0);
  flow.AddArc(1, 2, 1, 1.0);
  flow.AddArc(2, 3, 1, 1.0);
  flow.AddArc(0, 2, 1, 10.0);
  flow.AddArc(1, 3, 1, 10.0);
  const MinCostFlow::Result r = flow.Solve(0, 3, false);
  EXPECT_EQ(r.flow, 2);
  EXPECT_DOUBLE_EQ(r.cost, 22.0);
}

TEST(BMatchingTest, MatchesBruteForce) {
  Rng rng(17);
  for (int t = 0; t < 300; ++t) {
    const int nl = 1 + rng.UniformInt(3);
    const int nr = 1 + rng.UniformInt(6);
    std::vector<double> w(nl * nr);
    for (double& x : w) x = rng.Uniform(-0.3, 1.0);
    std::vector<int> caps(nl);
    for (int& c : caps) c = rng.UniformInt(4);
    const BMatching m = MaxWeightBMatching(nl, nr, w, caps);
    ASSERT_NEAR(m.weight, BruteBMatching(nl, nr, w, caps), 1e-9);
    std::vector<int> owner(nr, -1);
    double sum = 0.0;
    for (int l = 0; l < nl; ++l) {
      ASSERT_LE(static_cast<int>(m.assigned[l].size()), caps[l]);
      for (int r : m.assigned[l]) {
        ASSERT_EQ(owner[r], -1);
        owner[r] = l;
        ASSERT_GT(w[l * nr + r], 1e-9);
        sum += w[l * nr + r];
      }
    }
    EXPECT_NEAR(sum, m.weight, 1e-12);
  }
}

TEST(BMatchingTest, IgnoresNonPositiveWeights) {
  const std::vector<double> w{0.0, -1.0};
  const std::vector<int> caps{2};
  const BMatching m = MaxWeightBMatching(1, 2, w, caps);
  EXPECT_TRUE(m.assigned[0].empty());
  EXPECT_DOUBLE_EQ(m.weight, 0.0);
}

TEST(BMatchingTest, Deterministic) {
  Rng rng(2);
  std::vector<double> w(4 * 9);
  for (double& x : w) x = std::round(rng.Uniform(0, 3));  // many ties
  const std::vector<int> caps{2, 2, 3, 1};
  const BMatching a = MaxWeightBMatching(4, 9, w, caps);
  const BMatching b = MaxWeightBMatching(4, 9, w, caps);
  EXPECT_EQ(a.assigned, b.assigned);
}

}  // namespace
}  // namespace rtm
