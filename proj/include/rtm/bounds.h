#ifndef RTM_BOUNDS_H_
#define RTM_BOUNDS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rtm/instance.h"
#include "rtm/solvers.h"

namespace rtm {

// Parameters of the approximation-gap bounds for the log-sum-exp policy.
struct BoundInputs {
  int theta = 1;
  double tau = 0.01;
  int num_demands = 1;
  // gamma = num_supplies / num_demands.
  int num_supplies = 1;
  // Per-demand utility lower bounds a_i; a single value applies to all.
  std::vector<double> a;
  // Per-demand upper bounds b_i, same convention. Needed by the homogeneous
  // bound only.
  std::optional<std::vector<double>> b;
  double p_lo = 1.0;
  double p_hi = 1.0;
  // Evaluate formulas outside their hypotheses; such reports carry
  // guaranteed = false.
  bool allow_off_hypothesis = false;

  double gamma() const {
    return static_cast<double>(num_supplies) / num_demands;
  }
  int floor_gamma() const { return num_supplies / num_demands; }
  double a_at(int i) const { return a.size() == 1 ? a[0] : a[i]; }
  double b_at(int i) const { return b->size() == 1 ? (*b)[0] : (*b)[i]; }
};

// Throws InvalidArgument unless 0 < p_lo <= p_hi <= 1, sizes match, tau > 0
// and a_i <= b_i.
void ValidateBoundInputs(const BoundInputs& in);

struct BoundReport {
  // numerator / denominator; +inf when the denominator is 0.
  double gap_bound = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  // Labeled terms: tau_term, probability_term, baseline_value.
  std::vector<std::pair<std::string, double>> components;
  bool guaranteed = true;
  bool unbounded = false;
  std::string note;

  double component(const std::string& name) const;
};

// 1 - (1 - p)^theta.
double AtLeastOneAccepts(double p, int theta);

// Homogeneous p, uniform utilities on [a_i, b_i], gamma = theta:
//   [tau nD log(theta) + (1 - p/q) sum(b - a)]
//   / [sum a + ((theta/q - 1/p + 1) / (theta + 1)) sum(b - a)]
BoundReport Theorem1Bound(const BoundInputs& in);

// Heterogeneous p with u_ij >= a_i:
//   1 - p_lo/q_hi + tau p_lo nD log(theta p_hi / p_lo) / L
// where L credits the (nS - floor(gamma) nD)^+ demands with the largest a_i
// with floor(gamma) + 1 recommendations and the rest with floor(gamma).
BoundReport Theorem2Bound(const BoundInputs& in);

// Acceptance correlated across demands:
//   1 - p_lo + tau nD log(theta p_hi / p_lo) / sum_{i in D} a_i
// with D the top demands of Theorem2Bound when floor(gamma) = 0, else all.
BoundReport CorrelatedBound(const BoundInputs& in);

// Expected best accepted utility of theta i.i.d. uniform[a, b] utilities,
// each accepted independently with probability p.
double UniformBaselineValue(int theta, double p, double a, double b);

// Indices of the (nS - floor(gamma) nD)^+ demands with the largest a_i,
// ties to the lowest index, ascending.
std::vector<int> TopLowerBoundDemands(const BoundInputs& in);

// a_i = row minimum of u, b_i = row maximum, p range of the instance.
BoundInputs BoundInputsFromInstance(const Instance& instance, double tau);

struct DapGap {
  double gap = 0.0;
  double dap_value = 0.0;
  double reference_value = 0.0;
  std::string reference_method;
};

// Realized DAP gap against an exact reference: homog_exact when p is
// homogeneous, else brute force within `budget`. Throws BudgetExceeded when
// neither applies.
DapGap DapGapCertificate(const Instance& instance,
                         int64_t budget = kDefaultEnumerationBudget);

// Lower bound on the DAP gap for the adversarial family:
//   1 - ceil(gamma nD / theta) b / (min(nD, gamma nD) p a).
double AdversarialDapGapLowerBound(int num_demands, int theta, double gamma,
                                   double a, double b, double p);

}  // namespace rtm

#endif  // RTM_BOUNDS_H_
