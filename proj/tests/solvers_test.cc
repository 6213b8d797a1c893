#include <cmath>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "rtm/errors.h"
#include "rtm/evaluation.h"
#include "rtm/instance.h"
#include "rtm/rng.h"
#include "rtm/solvers.h"
#include "test_util.h"

namespace rtm {
namespace {

using testing::BruteMax;
using testing::LinearValue;
using testing::Near;
using testing::OutcomeSum;
using testing::RandomHomogeneous;
using testing::RandomInstance;
using testing::VisitAll;

Matrix DapWeights(const Instance& inst) {
  Matrix w(inst.num_demands, inst.num_supplies);
  for (int i = 0; i < inst.num_demands; ++i) {
    for (int j = 0; j < inst.num_supplies; ++j) {
      w(i, j) = inst.accept_prob(i, j) * inst.utilities(i, j);
    }
  }
  return w;
}

SolverConfig Tiny() {
  SolverConfig cfg;
  cfg.strategy = Strategy::kExactTiny;
  return cfg;
}

TEST(CountTest, MatchesEnumeration) {
  for (int nd = 1; nd <= 3; ++nd) {
    for (int ns = 1; ns <= 5; ++ns) {
      for (int theta = 1; theta <= 3; ++theta) {
        Rng rng(nd * 100 + ns * 10 + theta);
        const Instance inst = RandomInstance(rng, nd, ns, theta);
        int64_t oracle = 0;
        VisitAll(inst, [&](const Recommendation&) { ++oracle; });
        std::set<std::vector<std::vector<int>>> seen;
        ForEachFeasibleRecommendation(inst, [&](const Recommendation& r) {
          ASSERT_TRUE(ValidateRecommendation(inst, r));
          seen.insert(r.Canonical().lists);
        });
        EXPECT_EQ(static_cast<int64_t>(seen.size()), oracle);
        EXPECT_EQ(CountFeasibleRecommendations(nd, ns, theta),
                  static_cast<double>(oracle));
      }
    }
  }
}

TEST(CountTest, SmallClosedForms) {
  // theta >= S: every supply picks a demand or none.
  EXPECT_EQ(CountFeasibleRecommendations(2, 3, 3), 27.0);
  // One demand, one slot: none or one of S.
  EXPECT_EQ(CountFeasibleRecommendations(1, 5, 1), 6.0);
}

TEST(DapTest, MatchesBruteLinearOptimum) {
  Rng rng(41);
  for (int t = 0; t < 150; ++t) {
    const Instance inst = RandomInstance(rng, 1 + rng.UniformInt(3),
                                         1 + rng.UniformInt(5),
                                         1 + rng.UniformInt(3));
    const Matrix w = DapWeights(inst);
    const double best = BruteMax(
        inst, [&](const Recommendation& r) { return LinearValue(r, w); });
    const SolveReport rep = SolveDap(inst);
    ASSERT_TRUE(ValidateRecommendation(inst, rep.rec));
    EXPECT_NEAR(rep.solver_objective, best, 1e-9);
    EXPECT_NEAR(LinearValue(rep.rec, w), rep.solver_objective, 1e-12);
    EXPECT_NEAR(rep.exact_value, OutcomeSum(inst, rep.rec), 1e-12);
    EXPECT_TRUE(rep.certified_optimal);
    EXPECT_EQ(rep.method, "dap");
  }
}

TEST(NppTest, PrefersNearSupplies) {
  Instance inst;
  inst.num_demands = 2;
  inst.num_supplies = 3;
  inst.theta = 1;
  inst.utilities = Matrix(2, 3, 1.0);
  inst.accept_prob = Matrix(2, 3, 0.5);
  Matrix d(2, 3);
  d(0, 0) = 1; d(0, 1) = 5; d(0, 2) = 9;
  d(1, 0) = 2; d(1, 1) = 9; d(1, 2) = 3;
  EXPECT_THROW(SolveNpp(inst), InvalidArgument);
  inst.distances = d;
  const SolveReport rep = SolveNpp(inst);
  EXPECT_EQ(rep.rec.Canonical(), (Recommendation{{{0}, {2}}}));
}

TEST(HomogeneousExactTest, MatchesBruteForce) {
  Rng rng(42);
  for (int t = 0; t < 100; ++t) {
    const Instance inst = RandomHomogeneous(
        rng, 1 + rng.UniformInt(3), 1 + rng.UniformInt(6),
        1 + rng.UniformInt(2), rng.Uniform(0.05, 1.0));
    const double best = BruteMax(inst, [&](const Recommendation& r) {
      return OutcomeSum(inst, r);
    });
    const SolveReport rep = SolveHomogeneousExact(inst);
    ASSERT_TRUE(ValidateRecommendation(inst, rep.rec));
    EXPECT_NEAR(rep.exact_value, best, 1e-9);
    EXPECT_NEAR(rep.solver_objective, rep.exact_value, 1e-9);
  }
}

TEST(HomogeneousExactTest, RejectsHeterogeneous) {
  Rng rng(43);
  const Instance inst = RandomInstance(rng, 2, 3, 2);
  EXPECT_THROW(SolveHomogeneousExact(inst), InvalidArgument);
}

TEST(BruteForceTest, MatchesIndependentEnumeration) {
  Rng rng(44);
  for (int t = 0; t < 60; ++t) {
    const Instance inst = RandomInstance(rng, 1 + rng.UniformInt(3),
                                         1 + rng.UniformInt(5),
                                         1 + rng.UniformInt(3));
    const double best = BruteMax(inst, [&](const Recommendation& r) {
      return OutcomeSum(inst, r);
    });
    const SolveReport rep = BruteForceOpt(inst);
    EXPECT_NEAR(rep.exact_value, best, 1e-12);
    EXPECT_EQ(static_cast<double>(rep.iterations),
              CountFeasibleRecommendations(inst.num_demands,
                                           inst.num_supplies, inst.theta));
  }
}

TEST(BruteForceTest, BudgetExceeded) {
  Rng rng(45);
  const Instance inst = RandomInstance(rng, 3, 8, 3);
  EXPECT_THROW(BruteForceOpt(inst, 1000), BudgetExceeded);
}

TEST(SurrogateSolverTest, ExactTinyMatchesBruteSurrogate) {
  Rng rng(46);
  for (int t = 0; t < 80; ++t) {
    const Instance inst = RandomInstance(rng, 1 + rng.UniformInt(3),
                                         1 + rng.UniformInt(5),
                                         1 + rng.UniformInt(3), 0.4, 1.0,
                                         0.5, 1.0);
    SolverConfig cfg = Tiny();
    cfg.tau = rng.Uniform(0.01, 0.5);
    const double best = BruteMax(inst, [&](const Recommendation& r) {
      return SurrogateValue(inst, r, cfg.tau);
    });
    const SolveReport rep = SolveSurrogate(inst, cfg);
    ASSERT_TRUE(ValidateRecommendation(inst, rep.rec));
    EXPECT_TRUE(Near(rep.solver_objective, best, 1e-9));
    EXPECT_TRUE(rep.certified_optimal);
  }
}

TEST(SurrogateSolverTest, LocalSearchNearExactOnSmallCases) {
  Rng rng(47);
  for (int t = 0; t < 40; ++t) {
    const Instance inst =
        RandomInstance(rng, 3, 5, 2, 0.4, 1.0, 0.7, 0.9);
    SolverConfig cfg;
    const SolveReport ls = SolveSurrogate(inst, cfg);
    const SolveReport ex = SolveSurrogate(inst, Tiny());
    EXPECT_LE(ls.solver_objective, ex.solver_objective + 1e-9);
    EXPECT_GE(ls.solver_objective, ex.solver_objective - 0.05);
  }
}

TEST(SurrogateSolverTest, ThetaOneHomogeneousIsOptimal) {
  Rng rng(48);
  for (int t = 0; t < 50; ++t) {
    const Instance inst = RandomHomogeneous(rng, 1 + rng.UniformInt(3),
                                            1 + rng.UniformInt(4), 1,
                                            rng.Uniform(0.1, 1.0));
    const SolveReport rep = SolveSurrogate(inst, Tiny());
    EXPECT_NEAR(rep.exact_value, BruteForceOpt(inst).exact_value, 1e-9);
  }
}

TEST(SurrogateSolverTest, RelaxationBoundDominates) {
  Rng rng(49);
  for (int t = 0; t < 30; ++t) {
    const Instance inst =
        RandomInstance(rng, 2, 4, 2, 0.4, 1.0, 0.6, 0.9);
    SolverConfig cfg = Tiny();
    cfg.tau = 0.05;
    const SolveReport ex = SolveSurrogate(inst, cfg);
    const double ub = SurrogateRelaxationBound(inst, ex.rec, cfg.tau,
                                               cfg.empty_epsilon, 200);
    EXPECT_GE(ub, ex.solver_objective - 1e-9);
  }
}

TEST(SurrogateSolverTest, FrankWolfeOptionFillsUpperBound) {
  Rng rng(50);
  const Instance inst = RandomInstance(rng, 4, 10, 3, 0.4, 1.0, 0.7, 0.9);
  SolverConfig cfg;
  cfg.frank_wolfe_bound = true;
  const SolveReport rep = SolveSurrogate(inst, cfg);
  ASSERT_TRUE(rep.upper_bound.has_value());
  EXPECT_GE(*rep.upper_bound, rep.solver_objective - 1e-9);
  EXPECT_FALSE(rep.certified_optimal);
}

TEST(SurrogateSolverTest, UsesEverySupplyWhenRoomAllows) {
  Rng rng(51);
  const Instance inst = RandomInstance(rng, 5, 12, 3, 0.4, 1.0, 0.7, 0.9);
  const SolveReport rep = SolveSurrogate(inst, SolverConfig{});
  EXPECT_EQ(rep.rec.TotalSize(), 12);
}

TEST(SurrogateSolverTest, DeterministicForSeed) {
  Rng rng(52);
  const Instance inst = RandomInstance(rng, 6, 18, 3, 0.4, 1.0, 0.7, 0.9);
  SolverConfig cfg;
  cfg.seed = 5;
  const SolveReport a = SolveSurrogate(inst, cfg);
  const SolveReport b = SolveSurrogate(inst, cfg);
  EXPECT_EQ(a.rec, b.rec);
  EXPECT_EQ(a.solver_objective, b.solver_objective);
}

TEST(SurrogateSolverTest, GreedyIsValid) {
  Rng rng(53);
  const Instance inst = RandomInstance(rng, 4, 9, 2);
  SolverConfig cfg;
  cfg.strategy = Strategy::kGreedy;
  const SolveReport rep = SolveSurrogate(inst, cfg);
  EXPECT_TRUE(ValidateRecommendation(inst, rep.rec));
  EXPECT_NEAR(rep.exact_value, OutcomeSum(inst, rep.rec), 1e-12);
}

TEST(SaaSolverTest, ExactTinyMatchesBruteSampleAverage) {
  Rng rng(54);
  for (int t = 0; t < 30; ++t) {
    const Instance inst = RandomInstance(rng, 2, 4, 2);
    const ScenarioSet set = SampleScenarios(inst, 64, rng.NextU64());
    const double best = BruteMax(inst, [&](const Recommendation& r) {
      return ScenarioValue(inst, r, set).total;
    });
    const SolveReport rep = SolveSaa(inst, set, Tiny());
    EXPECT_NEAR(rep.solver_objective, best, 1e-12);
  }
}

TEST(SaaSolverTest, RejectsShapeMismatch) {
  Rng rng(55);
  const Instance inst = RandomInstance(rng, 2, 4, 2);
  const Instance other = RandomInstance(rng, 2, 5, 2);
  const ScenarioSet set = SampleScenarios(other, 10, 1);
  EXPECT_THROW(SolveSaa(inst, set, SolverConfig{}), InvalidArgument);
}

TEST(SolverConfigTest, Validation) {
  SolverConfig cfg;
  cfg.tau = 0.0;
  EXPECT_THROW(ValidateSolverConfig(cfg), InvalidArgument);
  cfg = SolverConfig{};
  cfg.multistart_count = 0;
  EXPECT_THROW(ValidateSolverConfig(cfg), InvalidArgument);
  EXPECT_EQ(ParseStrategy("local_search"), Strategy::kLocalSearch);
  EXPECT_EQ(ParseStrategy(StrategyName(Strategy::kExactTiny)),
            Strategy::kExactTiny);
  EXPECT_THROW(ParseStrategy("annealing"), InvalidArgument);
}

TEST(SolveMethodTest, Dispatch) {
  Rng rng(56);
  const Instance inst = RandomHomogeneous(rng, 2, 4, 2, 0.7);
  SolverConfig cfg;
  cfg.saa_samples = 50;
  for (const char* m : {"dap", "homog_exact", "surrogate", "saa",
                        "brute_force"}) {
    const SolveReport rep = SolveMethod(inst, m, cfg);
    EXPECT_EQ(rep.method, m);
    EXPECT_TRUE(ValidateRecommendation(inst, rep.rec));
  }
  EXPECT_THROW(SolveMethod(inst, "npp", cfg), InvalidArgument);
  EXPECT_THROW(SolveMethod(inst, "gurobi", cfg), InvalidArgument);
}

}  // namespace
}  // namespace rtm
