#ifndef RTM_EVALUATION_H_
#define RTM_EVALUATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtm/instance.h"
#include "rtm/rng.h"

namespace rtm {

enum class EvalMethod { kExact, kEnumeration, kMonteCarlo, kScenarioSet };

const char* EvalMethodName(EvalMethod m);

struct Evaluation {
  // Expected (or sample-average) total utility; equals the sum of per_demand.
  double total = 0.0;
  std::vector<double> per_demand;
  // Standard error of `total`, Monte Carlo only.
  std::optional<double> std_error;
  EvalMethod method = EvalMethod::kExact;
  int64_t samples = 0;
};

// Expected utility of one demand whose recommended supplies are `list`.
// Supplies are ranked by utility (ties by index) and the r-th ranked one is
// matched with probability p_r * prod_{k<r} (1 - p_k).
double ExactDemandValue(const Instance& instance, int demand,
                        std::span<const int> list);

// Closed-form expected total utility under independent acceptances.
Evaluation ExactExpectedUtility(const Instance& instance,
                                const Recommendation& rec);

inline constexpr int kMaxEnumerationListLength = 20;

// Brute force over all 2^k acceptance outcomes of every demand. Independent
// of the ranking formula; used as its oracle.
Evaluation EnumerateOutcomesValue(const Instance& instance,
                                  const Recommendation& rec);

// ---------------------------------------------------------------------------
// Sampled acceptance scenarios.

// rho = 0 is independent acceptance. For rho > 0 every sample draws one
// latent uniform per supplier; each cell uses it with probability rho instead
// of its own uniform, so a supplier's answers to different demands are
// positively correlated while every cell stays Bernoulli(p_ij) and distinct
// suppliers stay independent.
struct Correlation {
  double rho = 0.0;

  static Correlation Independent() { return {}; }
  static Correlation SupplierCommonFactor(double rho) { return {rho}; }
  bool independent() const { return rho == 0.0; }
};

// Realizations stored bit-packed per cell, samples along the bits.
class ScenarioSet {
 public:
  ScenarioSet(int num_demands, int num_supplies, int sample_count,
              uint64_t seed = 0, Correlation correlation = {});

  int num_demands() const { return num_demands_; }
  int num_supplies() const { return num_supplies_; }
  int sample_count() const { return sample_count_; }
  uint64_t seed() const { return seed_; }
  Correlation correlation() const { return correlation_; }

  bool accepted(int sample, int demand, int supply) const {
    const uint64_t word = Words(demand, supply)[sample >> 6];
    return (word >> (sample & 63)) & 1U;
  }
  void set(int sample, int demand, int supply, bool value);

  // Bit s of word s/64 is the realization in sample s. Padding bits are 0.
  std::span<const uint64_t> Words(int demand, int supply) const {
    return {bits_.data() + CellOffset(demand, supply), words_per_cell_};
  }
  size_t words_per_cell() const { return words_per_cell_; }

 private:
  size_t CellOffset(int demand, int supply) const {
    return (static_cast<size_t>(demand) * num_supplies_ + supply) *
           words_per_cell_;
  }

  int num_demands_;
  int num_supplies_;
  int sample_count_;
  uint64_t seed_;
  Correlation correlation_;
  size_t words_per_cell_;
  std::vector<uint64_t> bits_;
};

// Produces acceptance realizations one sample at a time. Sample s of a
// sampler equals sample s of SampleScenarios with the same arguments.
class ScenarioSampler {
 public:
  ScenarioSampler(const Instance& instance, uint64_t seed,
                  Correlation correlation = {});

  // Fills out[i * num_supplies + j] with the next sample's realizations.
  void Next(std::vector<uint8_t>& out);

 private:
  const Instance& instance_;
  Correlation correlation_;
  Rng cell_rng_;
  Rng factor_rng_;
  std::vector<double> factor_;
};

ScenarioSet SampleScenarios(const Instance& instance, int sample_count,
                            uint64_t seed, Correlation correlation = {});

// Average over samples of the second-stage value: each demand takes its best
// recommended supplier among those that accepted. `num_threads` splits the
// samples into blocks; the result is identical for every thread count.
Evaluation ScenarioValue(const Instance& instance, const Recommendation& rec,
                         const ScenarioSet& scenarios, int num_threads = 1);

// ScenarioValue over `sample_count` fresh samples, with the standard error
// of the mean (sample standard deviation / sqrt(n)).
Evaluation MonteCarloValue(const Instance& instance, const Recommendation& rec,
                           int64_t sample_count, uint64_t seed,
                           Correlation correlation = {});

// ---------------------------------------------------------------------------
// Log-sum-exp surrogate.

// Y_i = 0 (no recommendation, or only p = 0 supplies) contributes
// tau * log(kDefaultEmptyEpsilon).
inline constexpr double kDefaultEmptyEpsilon = 1e-12;

// Stable log(sum(exp(z))). Returns -infinity for an empty or all -inf input.
double LogSumExp(std::span<const double> z);

// tau * log(sum_j exp(u_ij / tau) p_ij) over `list`.
double SurrogateDemandValue(const Instance& instance, int demand,
                            std::span<const int> list, double tau,
                            double empty_epsilon = kDefaultEmptyEpsilon);

double SurrogateValue(const Instance& instance, const Recommendation& rec,
                      double tau, double empty_epsilon = kDefaultEmptyEpsilon);

// tau * log(sum_j ((exp(u_ij / tau) - 1) p_ij + 1)) over `list`; an upper
// bound on ExactDemandValue. An empty list contributes 0.
double Corollary1DemandUpper(const Instance& instance, int demand,
                             std::span<const int> list, double tau);

double Corollary1Upper(const Instance& instance, const Recommendation& rec,
                       double tau);

// ---------------------------------------------------------------------------
// Out-of-sample probability perturbations.

enum class PerturbKind { kOutL, kOutH, kOutNS, kOutNL };

const char* PerturbKindName(PerturbKind kind);
// Accepts "OutL", "Out-L", "outl" and so on.
PerturbKind ParsePerturbKind(const std::string& name);

struct PerturbSpec {
  PerturbKind kind = PerturbKind::kOutNS;
  uint64_t seed = 0;
  // Overrides the default width (0.05 for L/H, 0.025 for NS, 0.1 for NL).
  std::optional<double> width;

  double EffectiveWidth() const;
  std::string Tag() const;
};

struct Interval {
  double lo;
  double hi;
};

// Interval each probability is redrawn from: [p - w, p] for L, [p, p + w] for
// H, [p - w, p + w] for NS/NL, always clipped to [0, 1].
Interval PerturbInterval(PerturbKind kind, double p, double width);

// Copy of `instance` with every p_ij redrawn uniformly from its interval
// (demand-major order). Utilities are untouched.
Instance PerturbProbabilities(const Instance& instance, const PerturbSpec& spec);

}  // namespace rtm

#endif  // RTM_EVALUATION_H_
