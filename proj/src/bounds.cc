#include "rtm/bounds.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rtm/errors.h"
#include "rtm/evaluation.h"

namespace rtm {
namespace {

double SumA(const BoundInputs& in, const std::vector<int>& demands) {
  double s = 0.0;
  for (int i : demands) s += in.a_at(i);
  return s;
}

void Finish(BoundReport& r) {
  if (r.denominator > 0.0) {
    r.gap_bound = r.numerator / r.denominator;
  } else {
    r.unbounded = true;
    r.gap_bound = std::numeric_limits<double>::infinity();
    r.note += r.note.empty() ? "" : "; ";
    r.note += "denominator is 0, bound is vacuous";
  }
}

void OffHypothesis(const BoundInputs& in, BoundReport& r,
                   const std::string& what) {
  if (!in.allow_off_hypothesis) {
    throw InvalidArgument(what + " (set allow_off_hypothesis to evaluate "
                          "the formula anyway)");
  }
  r.guaranteed = false;
  r.note = what;
}

// The heterogeneous bound's baseline recommends floor(gamma) (+1) supplies
// per demand, which needs gamma <= theta.
void CheckConstructionFeasible(const BoundInputs& in, BoundReport& r) {
  if (in.num_supplies > static_cast<int64_t>(in.theta) * in.num_demands) {
    OffHypothesis(in, r,
                  "gamma = " + std::to_string(in.gamma()) + " exceeds theta = " +
                      std::to_string(in.theta) +
                      ", the baseline recommends more than theta supplies");
  }
}

}  // namespace

void ValidateBoundInputs(const BoundInputs& in) {
  if (in.theta < 1) throw InvalidArgument("theta must be >= 1");
  if (in.num_demands < 1) throw InvalidArgument("num_demands must be >= 1");
  if (in.num_supplies < 1) throw InvalidArgument("num_supplies must be >= 1");
  if (!(in.tau > 0.0)) throw InvalidArgument("tau must be positive");
  if (!(in.p_lo > 0.0 && in.p_lo <= in.p_hi && in.p_hi <= 1.0)) {
    throw InvalidArgument("need 0 < p_lo <= p_hi <= 1, got p_lo = " +
                          std::to_string(in.p_lo) +
                          ", p_hi = " + std::to_string(in.p_hi));
  }
  auto sized = [&](size_t n) {
    return n == 1 || n == static_cast<size_t>(in.num_demands);
  };
  if (in.a.empty() || !sized(in.a.size())) {
    throw InvalidArgument("a must have 1 or num_demands entries");
  }
  if (in.b) {
    if (in.b->empty() || !sized(in.b->size())) {
      throw InvalidArgument("b must have 1 or num_demands entries");
    }
    for (int i = 0; i < in.num_demands; ++i) {
      if (in.a_at(i) > in.b_at(i)) {
        throw InvalidArgument("a[" + std::to_string(i) + "] exceeds b[" +
                              std::to_string(i) + "]");
      }
    }
  }
}

double BoundReport::component(const std::string& name) const {
  for (const auto& [label, value] : components) {
    if (label == name) return value;
  }
  throw InvalidArgument("bound report has no component '" + name + "'");
}

double AtLeastOneAccepts(double p, int theta) {
  return 1.0 - std::pow(1.0 - p, theta);
}

BoundReport Theorem1Bound(const BoundInputs& in) {
  ValidateBoundInputs(in);
  if (in.p_lo != in.p_hi) {
    throw InvalidArgument("theorem1 needs homogeneous p, got p_lo = " +
                          std::to_string(in.p_lo) +
                          ", p_hi = " + std::to_string(in.p_hi));
  }
  if (!in.b) throw InvalidArgument("theorem1 needs utility upper bounds b");
  BoundReport r;
  if (in.num_supplies != static_cast<int64_t>(in.theta) * in.num_demands) {
    OffHypothesis(in, r,
                  "theorem1 assumes gamma = theta, got gamma = " +
                      std::to_string(in.gamma()));
  }
  const double p = in.p_lo;
  const int theta = in.theta;
  const double q = AtLeastOneAccepts(p, theta);
  double sum_a = 0.0;
  double sum_range = 0.0;
  for (int i = 0; i < in.num_demands; ++i) {
    sum_a += in.a_at(i);
    sum_range += in.b_at(i) - in.a_at(i);
  }
  const double tau_term = in.tau * in.num_demands * std::log(theta);
  const double prob_term = (1.0 - p / q) * sum_range;
  const double range_coef = (theta / q - 1.0 / p + 1.0) / (theta + 1.0);
  r.numerator = tau_term + prob_term;
  r.denominator = sum_a + range_coef * sum_range;
  r.components = {{"tau_term", tau_term},
                  {"probability_term", prob_term},
                  {"baseline_value", r.denominator}};
  Finish(r);
  return r;
}

std::vector<int> TopLowerBoundDemands(const BoundInputs& in) {
  const int64_t extra = static_cast<int64_t>(in.num_supplies) -
                        static_cast<int64_t>(in.floor_gamma()) * in.num_demands;
  const int count = static_cast<int>(
      std::clamp<int64_t>(extra, 0, in.num_demands));
  std::vector<int> order(in.num_demands);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return in.a_at(x) > in.a_at(y); });
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

BoundReport Theorem2Bound(const BoundInputs& in) {
  ValidateBoundInputs(in);
  BoundReport r;
  CheckConstructionFeasible(in, r);
  const int fg = in.floor_gamma();
  const double q_hi = AtLeastOneAccepts(in.p_hi, in.theta);
  const std::vector<int> top = TopLowerBoundDemands(in);
  std::vector<char> in_top(in.num_demands, 0);
  for (int i : top) in_top[i] = 1;
  const double cover_top = AtLeastOneAccepts(in.p_lo, fg + 1);
  const double cover_rest = AtLeastOneAccepts(in.p_lo, fg);
  double baseline = 0.0;
  for (int i = 0; i < in.num_demands; ++i) {
    baseline += (in_top[i] ? cover_top : cover_rest) * in.a_at(i);
  }
  const double prob_term = 1.0 - in.p_lo / q_hi;
  const double tau_term = in.tau * in.p_lo * in.num_demands *
                          std::log(in.theta * in.p_hi / in.p_lo);
  r.denominator = baseline;
  r.numerator = prob_term * baseline + tau_term;
  r.components = {{"tau_term", tau_term},
                  {"probability_term", prob_term},
                  {"baseline_value", baseline}};
  Finish(r);
  return r;
}

BoundReport CorrelatedBound(const BoundInputs& in) {
  ValidateBoundInputs(in);
  BoundReport r;
  std::vector<int> demands;
  if (in.floor_gamma() == 0) {
    demands = TopLowerBoundDemands(in);
  } else {
    demands.resize(in.num_demands);
    std::iota(demands.begin(), demands.end(), 0);
  }
  const double baseline = SumA(in, demands);
  const double prob_term = 1.0 - in.p_lo;
  const double tau_term = in.tau * in.num_demands *
                          std::log(in.theta * in.p_hi / in.p_lo);
  r.denominator = baseline;
  r.numerator = prob_term * baseline + tau_term;
  r.components = {{"tau_term", tau_term},
                  {"probability_term", prob_term},
                  {"baseline_value", baseline}};
  Finish(r);
  return r;
}

double UniformBaselineValue(int theta, double p, double a, double b) {
  if (theta < 1) throw InvalidArgument("theta must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p must be in [0, 1]");
  if (a > b) throw InvalidArgument("a must not exceed b");
  if (p == 0.0) return 0.0;
  const double none_of_more = std::pow(1.0 - p, theta + 1);
  return a * AtLeastOneAccepts(p, theta) +
         (b - a) * (1.0 - (1.0 - none_of_more) / ((theta + 1) * p));
}

BoundInputs BoundInputsFromInstance(const Instance& instance, double tau) {
  ValidateInstance(instance);
  BoundInputs in;
  in.theta = instance.theta;
  in.tau = tau;
  in.num_demands = instance.num_demands;
  in.num_supplies = instance.num_supplies;
  in.b.emplace();
  for (int i = 0; i < instance.num_demands; ++i) {
    const auto row = instance.utilities.row(i);
    in.a.push_back(*std::min_element(row.begin(), row.end()));
    in.b->push_back(*std::max_element(row.begin(), row.end()));
  }
  in.p_lo = MinAcceptProb(instance);
  in.p_hi = MaxAcceptProb(instance);
  return in;
}

DapGap DapGapCertificate(const Instance& instance, int64_t budget) {
  ValidateInstance(instance);
  DapGap out;
  SolveReport reference;
  if (IsHomogeneous(instance)) {
    reference = SolveHomogeneousExact(instance);
  } else if (CountFeasibleRecommendations(instance.num_demands,
                                          instance.num_supplies,
                                          instance.theta) <=
             static_cast<double>(budget)) {
    reference = BruteForceOpt(instance, budget);
  } else {
    throw BudgetExceeded(
        "no exact reference: probabilities are heterogeneous and the "
        "instance is too large to enumerate");
  }
  out.reference_method = reference.method;
  out.reference_value = reference.exact_value;
  out.dap_value = SolveDap(instance).exact_value;
  if (out.reference_value > 0.0) {
    out.gap = std::max(0.0, (out.reference_value - out.dap_value) /
                                out.reference_value);
  }
  return out;
}

double AdversarialDapGapLowerBound(int num_demands, int theta, double gamma,
                                   double a, double b, double p) {
  if (num_demands < 1 || theta < 1 || !(gamma > 0.0) || !(a > 0.0) ||
      !(p > 0.0)) {
    throw InvalidArgument("adversarial bound needs positive nD, theta, "
                          "gamma, a and p");
  }
  const double supplies = gamma * num_demands;
  const double high_rows = std::ceil(supplies / theta - 1e-9);
  return 1.0 - high_rows * b /
                   (std::min<double>(num_demands, supplies) * p * a);
}

}  // namespace rtm
