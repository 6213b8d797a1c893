#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "rtm/errors.h"
#include "rtm/evaluation.h"

namespace rtm {
namespace {

// Recommended supplies of `demand` ordered by utility descending, ties by
// ascending supply index.
std::vector<int> RankedList(const Instance& instance, int demand,
                            std::span<const int> list) {
  std::vector<int> ranked(list.begin(), list.end());
  std::sort(ranked.begin(), ranked.end(), [&](int a, int b) {
    const double ua = instance.utilities(demand, a);
    const double ub = instance.utilities(demand, b);
    return ua != ub ? ua > ub : a < b;
  });
  return ranked;
}

Evaluation FromPerDemand(std::vector<double> per_demand, EvalMethod method) {
  Evaluation e;
  e.total = 0.0;
  for (double v : per_demand) e.total += v;
  e.per_demand = std::move(per_demand);
  e.method = method;
  return e;
}

void CheckSizes(const Instance& instance, const ScenarioSet& scenarios) {
  if (scenarios.num_demands() != instance.num_demands ||
      scenarios.num_supplies() != instance.num_supplies) {
    throw InvalidArgument("scenario set shape does not match the instance");
  }
}

}  // namespace

const char* EvalMethodName(EvalMethod m) {
  switch (m) {
    case EvalMethod::kExact:
      return "exact";
    case EvalMethod::kEnumeration:
      return "enumeration";
    case EvalMethod::kMonteCarlo:
      return "monte_carlo";
    case EvalMethod::kScenarioSet:
      return "scenario_set";
  }
  return "unknown";
}

double ExactDemandValue(const Instance& instance, int demand,
                        std::span<const int> list) {
  double value = 0.0;
  double none_yet = 1.0;
  for (int j : RankedList(instance, demand, list)) {
    const double p = instance.accept_prob(demand, j);
    value += instance.utilities(demand, j) * p * none_yet;
    none_yet *= 1.0 - p;
  }
  return value;
}

Evaluation ExactExpectedUtility(const Instance& instance,
                                const Recommendation& rec) {
  CheckRecommendation(instance, rec);
  std::vector<double> per_demand(instance.num_demands);
  for (int i = 0; i < instance.num_demands; ++i) {
    per_demand[i] = ExactDemandValue(instance, i, rec.lists[i]);
  }
  return FromPerDemand(std::move(per_demand), EvalMethod::kExact);
}

Evaluation EnumerateOutcomesValue(const Instance& instance,
                                  const Recommendation& rec) {
  CheckRecommendation(instance, rec);
  std::vector<double> per_demand(instance.num_demands, 0.0);
  for (int i = 0; i < instance.num_demands; ++i) {
    const auto& list = rec.lists[i];
    const int k = static_cast<int>(list.size());
    if (k > kMaxEnumerationListLength) {
      throw InvalidArgument("demand " + std::to_string(i) + " has " +
                            std::to_string(k) +
                            " recommendations; enumeration supports at most " +
                            std::to_string(kMaxEnumerationListLength));
    }
    double value = 0.0;
    for (uint32_t outcome = 0; outcome < (1U << k); ++outcome) {
      double prob = 1.0;
      double best = 0.0;
      for (int r = 0; r < k; ++r) {
        const double p = instance.accept_prob(i, list[r]);
        if ((outcome >> r) & 1U) {
          prob *= p;
          best = std::max(best, instance.utilities(i, list[r]));
        } else {
          prob *= 1.0 - p;
        }
      }
      value += prob * best;
    }
    per_demand[i] = value;
  }
  return FromPerDemand(std::move(per_demand), EvalMethod::kEnumeration);
}

// ---------------------------------------------------------------------------

ScenarioSet::ScenarioSet(int num_demands, int num_supplies, int sample_count,
                         uint64_t seed, Correlation correlation)
    : num_demands_(num_demands),
      num_supplies_(num_supplies),
      sample_count_(sample_count),
      seed_(seed),
      correlation_(correlation),
      words_per_cell_((static_cast<size_t>(sample_count) + 63) / 64),
      bits_(static_cast<size_t>(num_demands) * num_supplies * words_per_cell_,
            0) {
  if (sample_count < 1) throw InvalidArgument("sample_count must be >= 1");
}

void ScenarioSet::set(int sample, int demand, int supply, bool value) {
  uint64_t& word = bits_[CellOffset(demand, supply) + (sample >> 6)];
  const uint64_t mask = uint64_t{1} << (sample & 63);
  word = value ? (word | mask) : (word & ~mask);
}

ScenarioSampler::ScenarioSampler(const Instance& instance, uint64_t seed,
                                 Correlation correlation)
    : instance_(instance),
      correlation_(correlation),
      cell_rng_(seed),
      factor_rng_(DeriveSeed(seed, "supplier_common_factor")),
      factor_(instance.num_supplies) {
  if (!(correlation.rho >= 0.0 && correlation.rho <= 1.0)) {
    throw InvalidArgument("correlation rho must be in [0, 1]");
  }
}

void ScenarioSampler::Next(std::vector<uint8_t>& out) {
  const int nd = instance_.num_demands;
  const int ns = instance_.num_supplies;
  out.resize(static_cast<size_t>(nd) * ns);
  const bool correlated = !correlation_.independent();
  if (correlated) {
    for (double& f : factor_) f = factor_rng_.Uniform();
  }
  for (int i = 0; i < nd; ++i) {
    for (int j = 0; j < ns; ++j) {
      // The cell stream is consumed identically in both modes, so rho = 0
      // reproduces the independent realizations exactly.
      double w = cell_rng_.Uniform();
      if (correlated && factor_rng_.Uniform() < correlation_.rho) {
        w = factor_[j];
      }
      out[static_cast<size_t>(i) * ns + j] = w < instance_.accept_prob(i, j);
    }
  }
}

ScenarioSet SampleScenarios(const Instance& instance, int sample_count,
                            uint64_t seed, Correlation correlation) {
  ScenarioSet set(instance.num_demands, instance.num_supplies, sample_count,
                  seed, correlation);
  ScenarioSampler sampler(instance, seed, correlation);
  std::vector<uint8_t> buf;
  const int ns = instance.num_supplies;
  for (int s = 0; s < sample_count; ++s) {
    sampler.Next(buf);
    for (int i = 0; i < instance.num_demands; ++i) {
      for (int j = 0; j < ns; ++j) {
        if (buf[static_cast<size_t>(i) * ns + j]) set.set(s, i, j, true);
      }
    }
  }
  return set;
}

Evaluation ScenarioValue(const Instance& instance, const Recommendation& rec,
                         const ScenarioSet& scenarios, int num_threads) {
  CheckRecommendation(instance, rec);
  CheckSizes(instance, scenarios);
  const int nd = instance.num_demands;
  std::vector<std::vector<int>> ranked(nd);
  std::vector<size_t> offset(nd + 1, 0);
  for (int i = 0; i < nd; ++i) {
    ranked[i] = RankedList(instance, i, rec.lists[i]);
    offset[i + 1] = offset[i] + ranked[i].size();
  }
  // counts[offset[i] + r]: samples in which the r-th ranked supply of demand
  // i is the best accepting one. Integer counts make the block reduction
  // order-independent.
  const size_t words = scenarios.words_per_cell();
  auto count_block = [&](size_t w_begin, size_t w_end,
                         std::vector<int64_t>& counts) {
    counts.assign(offset[nd], 0);
    for (int i = 0; i < nd; ++i) {
      for (size_t w = w_begin; w < w_end; ++w) {
        uint64_t covered = 0;
        for (size_t r = 0; r < ranked[i].size(); ++r) {
          const uint64_t bits = scenarios.Words(i, ranked[i][r])[w];
          counts[offset[i] + r] += std::popcount(bits & ~covered);
          covered |= bits;
        }
      }
    }
  };
  const int threads =
      std::clamp(num_threads, 1, static_cast<int>(std::max<size_t>(words, 1)));
  std::vector<std::vector<int64_t>> partial(threads);
  if (threads == 1) {
    count_block(0, words, partial[0]);
  } else {
    std::vector<std::jthread> pool;
    const size_t chunk = (words + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const size_t lo = std::min(words, t * chunk);
      const size_t hi = std::min(words, lo + chunk);
      pool.emplace_back([&, t, lo, hi] { count_block(lo, hi, partial[t]); });
    }
  }
  std::vector<int64_t> counts(offset[nd], 0);
  for (const auto& part : partial) {
    for (size_t k = 0; k < counts.size(); ++k) counts[k] += part[k];
  }
  const double n = scenarios.sample_count();
  std::vector<double> per_demand(nd, 0.0);
  for (int i = 0; i < nd; ++i) {
    double sum = 0.0;
    for (size_t r = 0; r < ranked[i].size(); ++r) {
      sum += instance.utilities(i, ranked[i][r]) *
             static_cast<double>(counts[offset[i] + r]);
    }
    per_demand[i] = sum / n;
  }
  Evaluation e = FromPerDemand(std::move(per_demand), EvalMethod::kScenarioSet);
  e.samples = scenarios.sample_count();
  return e;
}

Evaluation MonteCarloValue(const Instance& instance, const Recommendation& rec,
                           int64_t sample_count, uint64_t seed,
                           Correlation correlation) {
  CheckRecommendation(instance, rec);
  if (sample_count < 1) throw InvalidArgument("sample_count must be >= 1");
  const int nd = instance.num_demands;
  const int ns = instance.num_supplies;
  std::vector<std::vector<int>> ranked(nd);
  for (int i = 0; i < nd; ++i) {
    ranked[i] = RankedList(instance, i, rec.lists[i]);
  }
  ScenarioSampler sampler(instance, seed, correlation);
  std::vector<uint8_t> buf;
  std::vector<double> demand_sum(nd, 0.0);
  // Welford running mean / sum of squared deviations of the sample totals.
  double mean = 0.0;
  double m2 = 0.0;
  for (int64_t s = 0; s < sample_count; ++s) {
    sampler.Next(buf);
    double total = 0.0;
    for (int i = 0; i < nd; ++i) {
      for (int j : ranked[i]) {
        if (buf[static_cast<size_t>(i) * ns + j]) {
          const double u = instance.utilities(i, j);
          demand_sum[i] += u;
          total += u;
          break;
        }
      }
    }
    const double delta = total - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (total - mean);
  }
  const double n = static_cast<double>(sample_count);
  std::vector<double> per_demand(nd);
  for (int i = 0; i < nd; ++i) per_demand[i] = demand_sum[i] / n;
  Evaluation e = FromPerDemand(std::move(per_demand), EvalMethod::kMonteCarlo);
  e.samples = sample_count;
  e.std_error = sample_count > 1 ? std::sqrt(m2 / (n - 1.0)) / std::sqrt(n) : 0.0;
  return e;
}

// ---------------------------------------------------------------------------

double LogSumExp(std::span<const double> z) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : z) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

double SurrogateDemandValue(const Instance& instance, int demand,
                            std::span<const int> list, double tau,
                            double empty_epsilon) {
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  std::vector<double> z;
  z.reserve(list.size());
  for (int j : list) {
    const double p = instance.accept_prob(demand, j);
    if (p > 0.0) z.push_back(instance.utilities(demand, j) / tau + std::log(p));
  }
  if (z.empty()) return tau * std::log(empty_epsilon);
  return tau * LogSumExp(z);
}

double SurrogateValue(const Instance& instance, const Recommendation& rec,
                      double tau, double empty_epsilon) {
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  CheckRecommendation(instance, rec);
  double total = 0.0;
  for (int i = 0; i < instance.num_demands; ++i) {
    total += SurrogateDemandValue(instance, i, rec.lists[i], tau, empty_epsilon);
  }
  return total;
}

double Corollary1DemandUpper(const Instance& instance, int demand,
                             std::span<const int> list, double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  if (list.empty()) return 0.0;
  // (e^{u/tau} - 1) p + 1 = p e^{u/tau} + (1 - p), summed in log space.
  std::vector<double> z;
  z.reserve(2 * list.size());
  for (int j : list) {
    const double p = instance.accept_prob(demand, j);
    if (p > 0.0) z.push_back(instance.utilities(demand, j) / tau + std::log(p));
    if (p < 1.0) z.push_back(std::log1p(-p));
  }
  return tau * LogSumExp(z);
}

double Corollary1Upper(const Instance& instance, const Recommendation& rec,
                       double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  CheckRecommendation(instance, rec);
  double total = 0.0;
  for (int i = 0; i < instance.num_demands; ++i) {
    total += Corollary1DemandUpper(instance, i, rec.lists[i], tau);
  }
  return total;
}

// ---------------------------------------------------------------------------

const char* PerturbKindName(PerturbKind kind) {
  switch (kind) {
    case PerturbKind::kOutL:
      return "OutL";
    case PerturbKind::kOutH:
      return "OutH";
    case PerturbKind::kOutNS:
      return "OutNS";
    case PerturbKind::kOutNL:
      return "OutNL";
  }
  return "unknown";
}

PerturbKind ParsePerturbKind(const std::string& name) {
  std::string key;
  for (char c : name) {
    if (c != '-' && c != '_') key.push_back(static_cast<char>(std::tolower(c)));
  }
  if (key == "outl") return PerturbKind::kOutL;
  if (key == "outh") return PerturbKind::kOutH;
  if (key == "outns") return PerturbKind::kOutNS;
  if (key == "outnl") return PerturbKind::kOutNL;
  throw InvalidArgument("unknown perturbation kind '" + name + "'");
}

double PerturbSpec::EffectiveWidth() const {
  if (width) return *width;
  switch (kind) {
    case PerturbKind::kOutL:
    case PerturbKind::kOutH:
      return 0.05;
    case PerturbKind::kOutNS:
      return 0.025;
    case PerturbKind::kOutNL:
      return 0.1;
  }
  return 0.0;
}

std::string PerturbSpec::Tag() const {
  std::string tag = PerturbKindName(kind);
  if (width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "(w=%g)", *width);
    tag += buf;
  }
  return tag;
}

Interval PerturbInterval(PerturbKind kind, double p, double width) {
  switch (kind) {
    case PerturbKind::kOutL:
      return {std::max(0.0, p - width), p};
    case PerturbKind::kOutH:
      return {p, std::min(p + width, 1.0)};
    case PerturbKind::kOutNS:
    case PerturbKind::kOutNL:
      return {std::max(0.0, p - width), std::min(p + width, 1.0)};
  }
  return {p, p};
}

Instance PerturbProbabilities(const Instance& instance,
                              const PerturbSpec& spec) {
  const double width = spec.EffectiveWidth();
  if (!(width >= 0.0)) throw InvalidArgument("perturbation width must be >= 0");
  Instance out = instance;
  Rng rng(spec.seed);
  for (int i = 0; i < instance.num_demands; ++i) {
    for (int j = 0; j < instance.num_supplies; ++j) {
      const Interval iv =
          PerturbInterval(spec.kind, instance.accept_prob(i, j), width);
      out.accept_prob(i, j) = rng.Uniform(iv.lo, iv.hi);
    }
  }
  return out;
}

}  // namespace rtm
