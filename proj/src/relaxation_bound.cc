#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rtm/errors.h"
#include "rtm/min_cost_flow.h"
#include "rtm/solvers.h"

namespace rtm {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Weight of the uniform point mixed into the start so every row is positive.
constexpr double kStartMix = 1e-3;
constexpr double kMatchTol = 1e-12;
constexpr int kLineSearchSteps = 60;

// F(x) = tau * sum_i log(eps + sum_j exp(z_ij) x_ij) with z = u / tau + log p,
// kept in log domain with per-demand shifts. F is concave and, on integral
// points, no smaller than the surrogate, so its maximum over the relaxed
// polytope bounds the surrogate optimum.
class RelaxedSurrogate {
 public:
  RelaxedSurrogate(const Instance& instance, double tau, double eps)
      : nd_(instance.num_demands),
        ns_(instance.num_supplies),
        tau_(tau),
        scaled_(static_cast<size_t>(nd_) * ns_),
        shift_(nd_),
        eps_scaled_(nd_) {
    for (int i = 0; i < nd_; ++i) {
      double m = std::log(eps);
      std::vector<double> z(ns_);
      for (int j = 0; j < ns_; ++j) {
        const double p = instance.accept_prob(i, j);
        z[j] = p > 0.0 ? instance.utilities(i, j) / tau + std::log(p) : kNegInf;
        m = std::max(m, z[j]);
      }
      shift_[i] = m;
      eps_scaled_[i] = std::exp(std::log(eps) - m);
      for (int j = 0; j < ns_; ++j) scaled_[Idx(i, j)] = std::exp(z[j] - m);
    }
  }

  size_t Idx(int i, int j) const { return static_cast<size_t>(i) * ns_ + j; }

  double RowSum(const std::vector<double>& x, int i) const {
    double y = eps_scaled_[i];
    for (int j = 0; j < ns_; ++j) y += scaled_[Idx(i, j)] * x[Idx(i, j)];
    return y;
  }

  double Value(const std::vector<double>& x) const {
    double f = 0.0;
    for (int i = 0; i < nd_; ++i) f += tau_ * (shift_[i] + std::log(RowSum(x, i)));
    return f;
  }

  void Gradient(const std::vector<double>& x, std::vector<double>& g) const {
    g.resize(x.size());
    for (int i = 0; i < nd_; ++i) {
      const double y = RowSum(x, i);
      for (int j = 0; j < ns_; ++j) g[Idx(i, j)] = tau_ * scaled_[Idx(i, j)] / y;
    }
  }

  // d/dt F(x + t d).
  double Slope(const std::vector<double>& x, const std::vector<double>& d,
               double t) const {
    double s = 0.0;
    for (int i = 0; i < nd_; ++i) {
      double y = eps_scaled_[i];
      double dy = 0.0;
      for (int j = 0; j < ns_; ++j) {
        const size_t k = Idx(i, j);
        y += scaled_[k] * (x[k] + t * d[k]);
        dy += scaled_[k] * d[k];
      }
      s += tau_ * dy / y;
    }
    return s;
  }

 private:
  int nd_;
  int ns_;
  double tau_;
  std::vector<double> scaled_;
  std::vector<double> shift_;
  std::vector<double> eps_scaled_;
};

}  // namespace

double SurrogateRelaxationBound(const Instance& instance,
                                const Recommendation& start, double tau,
                                double empty_epsilon, int iterations) {
  ValidateInstance(instance);
  CheckRecommendation(instance, start);
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  const int nd = instance.num_demands;
  const int ns = instance.num_supplies;
  const RelaxedSurrogate f(instance, tau, empty_epsilon);

  std::vector<double> x(static_cast<size_t>(nd) * ns, 0.0);
  const double uniform =
      std::min(1.0 / nd, static_cast<double>(instance.theta) / ns);
  for (double& v : x) v = kStartMix * uniform;
  for (int i = 0; i < nd; ++i) {
    for (int j : start.lists[i]) x[f.Idx(i, j)] += 1.0 - kStartMix;
  }

  const std::vector<int> caps(nd, instance.theta);
  const double max_matched = std::min(static_cast<double>(nd) * instance.theta,
                                      static_cast<double>(ns));
  double bound = std::numeric_limits<double>::infinity();
  std::vector<double> g;
  std::vector<double> weights(x.size());
  std::vector<double> dir(x.size());
  for (int it = 0; it <= iterations; ++it) {
    f.Gradient(x, g);
    const double gmax = *std::max_element(g.begin(), g.end());
    if (!std::all_of(g.begin(), g.end(),
                     [](double v) { return std::isfinite(v); })) {
      break;
    }
    for (size_t k = 0; k < g.size(); ++k) {
      weights[k] = gmax > 0.0 ? g[k] / gmax : 0.0;
    }
    const BMatching vertex =
        MaxWeightBMatching(nd, ns, weights, caps, kMatchTol);
    std::fill(dir.begin(), dir.end(), 0.0);
    for (int i = 0; i < nd; ++i) {
      for (int j : vertex.assigned[i]) dir[f.Idx(i, j)] = 1.0;
    }
    double gap = 0.0;
    for (size_t k = 0; k < x.size(); ++k) {
      dir[k] -= x[k];
      gap += g[k] * dir[k];
    }
    // Pairs below the matching tolerance may have been skipped; pad for them.
    const double slack = 2.0 * max_matched * kMatchTol * gmax;
    const double fx = f.Value(x);
    bound = std::min(bound, fx + std::max(gap, 0.0) + slack);
    if (it == iterations || gap <= 1e-13 * std::max(1.0, std::abs(fx))) break;

    double step = 1.0;
    if (f.Slope(x, dir, 1.0) < 0.0) {
      double lo = 0.0;
      double hi = 1.0;
      for (int s = 0; s < kLineSearchSteps; ++s) {
        const double mid = 0.5 * (lo + hi);
        (f.Slope(x, dir, mid) > 0.0 ? lo : hi) = mid;
      }
      step = lo;
    }
    if (step <= 0.0) break;
    for (size_t k = 0; k < x.size(); ++k) x[k] += step * dir[k];
  }
  return bound;
}

}  // namespace rtm
