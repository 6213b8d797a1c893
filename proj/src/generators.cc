#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "rtm/errors.h"
#include "rtm/instance.h"
#include "rtm/rng.h"

// All generators draw from one Rng seeded with cfg.seed, in a fixed order:
// per-demand terms, per-supply terms, then cells demand-major (i outer, j
// inner), then acceptance probabilities demand-major.

namespace rtm {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void CheckDims(const GenConfig& cfg) {
  if (cfg.num_demands < 1 || cfg.num_supplies < 1) {
    throw InvalidArgument("num_demands and num_supplies must be positive");
  }
  if (cfg.theta < 1) throw InvalidArgument("theta must be >= 1");
}

void CheckProbModel(const ProbModel& model) {
  std::visit(Overloaded{
                 [](const HomogeneousProb& m) {
                   if (!(m.p >= 0.0 && m.p <= 1.0)) {
                     throw InvalidArgument("homogeneous p must be in [0, 1]");
                   }
                 },
                 [](const UniformProb& m) {
                   if (!(0.0 <= m.lo && m.lo <= m.hi && m.hi <= 1.0)) {
                     throw InvalidArgument(
                         "uniform probability range needs 0 <= lo <= hi <= 1");
                   }
                 },
                 [](const CaseLikeProb&) {},
             },
             model);
}

Instance Shell(const GenConfig& cfg) {
  Instance inst;
  inst.num_demands = cfg.num_demands;
  inst.num_supplies = cfg.num_supplies;
  inst.theta = cfg.theta;
  inst.utilities = Matrix(cfg.num_demands, cfg.num_supplies);
  inst.accept_prob = Matrix(cfg.num_demands, cfg.num_supplies);
  inst.label = cfg.label;
  inst.seed = cfg.seed;
  return inst;
}

// Homogeneous and uniform-range models; the case-like model is filled by
// GenerateCaseLike because it needs the utility attributes.
void FillSimpleProb(const ProbModel& model, Rng& rng, Instance& inst) {
  if (const auto* h = std::get_if<HomogeneousProb>(&model)) {
    for (int i = 0; i < inst.num_demands; ++i) {
      for (int j = 0; j < inst.num_supplies; ++j) inst.accept_prob(i, j) = h->p;
    }
    return;
  }
  if (const auto* u = std::get_if<UniformProb>(&model)) {
    for (int i = 0; i < inst.num_demands; ++i) {
      for (int j = 0; j < inst.num_supplies; ++j) {
        inst.accept_prob(i, j) = rng.Uniform(u->lo, u->hi);
      }
    }
    return;
  }
  throw InvalidArgument(
      "case_like acceptance probabilities require the case_like utility model");
}

// Min-max normalization of one column to [-1, 1]; constant columns map to 0.
void RelativeColumn(const Matrix& m, int j, std::vector<double>& out) {
  double lo = m(0, j);
  double hi = m(0, j);
  for (int i = 1; i < m.rows(); ++i) {
    lo = std::min(lo, m(i, j));
    hi = std::max(hi, m(i, j));
  }
  out.resize(m.rows());
  for (int i = 0; i < m.rows(); ++i) {
    out[i] = hi > lo ? 2.0 * (m(i, j) - lo) / (hi - lo) - 1.0 : 0.0;
  }
}

}  // namespace

Instance Generate(const GenConfig& cfg) {
  return std::visit(
      Overloaded{
          [&](const Synthetic3Part&) { return GenerateSynthetic(cfg); },
          [&](const UniformUtility&) { return GenerateUniform(cfg); },
          [&](const CaseLikeUtility&) { return GenerateCaseLike(cfg); },
          [&](const AdversarialUtility& m) {
            const auto* h = std::get_if<HomogeneousProb>(&cfg.prob_model);
            if (h == nullptr) {
              throw InvalidArgument(
                  "adversarial utility model requires homogeneous p");
            }
            Instance inst = GenerateAdversarialDap(
                cfg.num_demands, cfg.theta,
                static_cast<double>(cfg.num_supplies) / cfg.num_demands, m.a,
                m.b, h->p, cfg.seed);
            inst.label = cfg.label;
            return inst;
          },
      },
      cfg.utility_model);
}

Instance GenerateSynthetic(const GenConfig& cfg) {
  CheckDims(cfg);
  CheckProbModel(cfg.prob_model);
  Instance inst = Shell(cfg);
  Rng rng(cfg.seed);
  std::vector<double> demand_term(cfg.num_demands);
  std::vector<double> supply_term(cfg.num_supplies);
  for (double& v : demand_term) v = rng.Uniform();
  for (double& v : supply_term) v = rng.Uniform();
  for (int i = 0; i < cfg.num_demands; ++i) {
    for (int j = 0; j < cfg.num_supplies; ++j) {
      inst.utilities(i, j) = 0.4 + 0.2 * demand_term[i] +
                             0.2 * supply_term[j] + 0.2 * rng.Uniform();
    }
  }
  FillSimpleProb(cfg.prob_model, rng, inst);
  return inst;
}

Instance GenerateUniform(const GenConfig& cfg) {
  CheckDims(cfg);
  CheckProbModel(cfg.prob_model);
  const auto& model = std::get<UniformUtility>(cfg.utility_model);
  auto per_demand = [&](const std::vector<double>& v, const char* name) {
    if (v.size() == 1) return std::vector<double>(cfg.num_demands, v[0]);
    if (static_cast<int>(v.size()) != cfg.num_demands) {
      throw InvalidArgument(std::string("uniform utility ") + name +
                            " needs 1 or num_demands entries");
    }
    return v;
  };
  const std::vector<double> lo = per_demand(model.lo, "lo");
  const std::vector<double> hi = per_demand(model.hi, "hi");
  for (int i = 0; i < cfg.num_demands; ++i) {
    if (!(0.0 <= lo[i] && lo[i] <= hi[i] && std::isfinite(hi[i]))) {
      throw InvalidArgument("uniform utility range for demand " +
                            std::to_string(i) + " needs 0 <= lo <= hi");
    }
  }
  Instance inst = Shell(cfg);
  Rng rng(cfg.seed);
  for (int i = 0; i < cfg.num_demands; ++i) {
    for (int j = 0; j < cfg.num_supplies; ++j) {
      inst.utilities(i, j) = rng.Uniform(lo[i], hi[i]);
    }
  }
  FillSimpleProb(cfg.prob_model, rng, inst);
  return inst;
}

int AdversarialHighRowCount(int num_supplies, int theta) {
  return (num_supplies + theta - 1) / theta;
}

Instance GenerateAdversarialDap(int num_demands, int theta, double gamma,
                                double a, double b, double p, uint64_t seed) {
  if (num_demands < 1 || theta < 1) {
    throw InvalidArgument("num_demands and theta must be positive");
  }
  if (!(a >= 0.0 && a <= b && std::isfinite(b))) {
    throw InvalidArgument("adversarial utilities need 0 <= a <= b");
  }
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("p must be in (0, 1]");
  const double supplies = gamma * num_demands;
  const long rounded = std::lround(supplies);
  if (!(gamma > 0.0) || std::abs(supplies - rounded) > 1e-9 || rounded < 1) {
    throw InvalidArgument("gamma * num_demands must be a positive integer");
  }
  const int num_supplies = static_cast<int>(rounded);
  const int high_rows = AdversarialHighRowCount(num_supplies, theta);
  if (high_rows > num_demands) {
    throw InvalidArgument("ceil(gamma * num_demands / theta) exceeds "
                          "num_demands; need gamma <= theta");
  }
  Instance inst;
  inst.num_demands = num_demands;
  inst.num_supplies = num_supplies;
  inst.theta = theta;
  inst.utilities = Matrix(num_demands, num_supplies, a);
  inst.accept_prob = Matrix(num_demands, num_supplies, p);
  for (int i = 0; i < high_rows; ++i) {
    for (int j = 0; j < num_supplies; ++j) inst.utilities(i, j) = b;
  }
  inst.label = "adversarial";
  inst.seed = seed;
  return inst;
}

double HistoricalAcceptanceQuantile(double u) {
  static constexpr std::array<std::pair<double, double>, 7> kKnots = {{
      {0.0, 0.0},
      {0.005, 0.05},
      {0.25, 0.45},
      {0.50, 0.64},
      {0.75, 0.76},
      {0.969, 0.95},
      {1.0, 1.0},
  }};
  u = std::clamp(u, 0.0, 1.0);
  for (size_t k = 1; k < kKnots.size(); ++k) {
    if (u <= kKnots[k].first) {
      const auto [u0, q0] = kKnots[k - 1];
      const auto [u1, q1] = kKnots[k];
      return q0 + (q1 - q0) * (u - u0) / (u1 - u0);
    }
  }
  return 1.0;
}

double CaseLikeAcceptance(double p_hist, double rel_distance,
                          double rel_familiarity) {
  if (p_hist < 0.05 || p_hist > 0.95) return p_hist;
  const double p = p_hist + 0.025 * rel_distance + 0.025 * rel_familiarity;
  // Mathematically within [0, 1]; the clamp only absorbs rounding at 0.95.
  return std::clamp(p, 0.0, 1.0);
}

Instance GenerateCaseLike(const GenConfig& cfg) {
  CheckDims(cfg);
  CheckProbModel(cfg.prob_model);
  const int nd = cfg.num_demands;
  const int ns = cfg.num_supplies;
  Instance inst = Shell(cfg);
  Rng rng(cfg.seed);

  std::vector<double> p_hist(ns);
  std::vector<double> driver_score(ns);
  std::vector<double> shipper_score(nd);
  std::vector<double> revenue(nd);
  for (double& v : p_hist) v = HistoricalAcceptanceQuantile(rng.Uniform());
  for (double& v : driver_score) v = rng.Uniform();
  for (double& v : shipper_score) v = rng.Uniform();
  for (double& v : revenue) v = rng.Uniform();

  Matrix distance(nd, ns);
  Matrix familiarity(nd, ns);
  for (int i = 0; i < nd; ++i) {
    for (int j = 0; j < ns; ++j) distance(i, j) = rng.Uniform();
  }
  for (int i = 0; i < nd; ++i) {
    for (int j = 0; j < ns; ++j) familiarity(i, j) = rng.Uniform();
  }
  const double max_distance =
      *std::max_element(distance.data().begin(), distance.data().end());
  // Closeness: shorter distance means higher utility.
  Matrix closeness(nd, ns);
  for (int i = 0; i < nd; ++i) {
    for (int j = 0; j < ns; ++j) {
      closeness(i, j) = max_distance - distance(i, j);
      inst.utilities(i, j) = 0.1 * driver_score[j] + 0.1 * shipper_score[i] +
                             0.2 * revenue[i] + 0.3 * closeness(i, j) +
                             0.3 * familiarity(i, j);
    }
  }
  inst.distances = distance;

  if (std::holds_alternative<CaseLikeProb>(cfg.prob_model)) {
    std::vector<double> rel_close;
    std::vector<double> rel_fam;
    for (int j = 0; j < ns; ++j) {
      RelativeColumn(closeness, j, rel_close);
      RelativeColumn(familiarity, j, rel_fam);
      for (int i = 0; i < nd; ++i) {
        inst.accept_prob(i, j) =
            CaseLikeAcceptance(p_hist[j], rel_close[i], rel_fam[i]);
      }
    }
  } else {
    FillSimpleProb(cfg.prob_model, rng, inst);
  }
  return inst;
}

}  // namespace rtm
