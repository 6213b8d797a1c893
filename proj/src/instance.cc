#include <algorithm>
#include <cmath>
#include <string>

#include "rtm/errors.h"
#include "rtm/instance.h"

namespace rtm {
namespace {

std::string Cell(const char* name, int i, int j) {
  return std::string(name) + "[" + std::to_string(i) + "][" +
         std::to_string(j) + "]";
}

void CheckShape(const Matrix& m, const Instance& instance, const char* name) {
  if (m.rows() != instance.num_demands || m.cols() != instance.num_supplies) {
    throw InvalidArgument(std::string(name) + " has shape " +
                          std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", expected " +
                          std::to_string(instance.num_demands) + "x" +
                          std::to_string(instance.num_supplies));
  }
}

}  // namespace

void ValidateInstance(const Instance& instance) {
  if (instance.num_demands < 1) {
    throw InvalidArgument("num_demands must be positive");
  }
  if (instance.num_supplies < 1) {
    throw InvalidArgument("num_supplies must be positive");
  }
  if (instance.theta < 1) throw InvalidArgument("theta must be >= 1");
  CheckShape(instance.utilities, instance, "utilities");
  CheckShape(instance.accept_prob, instance, "accept_prob");
  if (instance.distances) CheckShape(*instance.distances, instance, "distances");
  for (int i = 0; i < instance.num_demands; ++i) {
    for (int j = 0; j < instance.num_supplies; ++j) {
      const double u = instance.utilities(i, j);
      if (!std::isfinite(u) || u < 0.0) {
        throw InvalidArgument(Cell("utilities", i, j) + " = " +
                              std::to_string(u) +
                              " is not a finite nonnegative number");
      }
      const double p = instance.accept_prob(i, j);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidArgument(Cell("accept_prob", i, j) + " = " +
                              std::to_string(p) + " is outside [0, 1]");
      }
      if (instance.distances) {
        const double d = (*instance.distances)(i, j);
        if (!std::isfinite(d) || d < 0.0) {
          throw InvalidArgument(Cell("distances", i, j) + " = " +
                                std::to_string(d) +
                                " is not a finite nonnegative number");
        }
      }
    }
  }
}

bool IsHomogeneous(const Instance& instance, double tol) {
  const auto& p = instance.accept_prob.data();
  if (p.empty()) return true;
  return std::all_of(p.begin(), p.end(),
                     [&](double v) { return std::abs(v - p.front()) <= tol; });
}

double MinAcceptProb(const Instance& instance) {
  const auto& p = instance.accept_prob.data();
  return *std::min_element(p.begin(), p.end());
}

double MaxAcceptProb(const Instance& instance) {
  const auto& p = instance.accept_prob.data();
  return *std::max_element(p.begin(), p.end());
}

int Recommendation::TotalSize() const {
  int n = 0;
  for (const auto& l : lists) n += static_cast<int>(l.size());
  return n;
}

Recommendation Recommendation::Canonical() const {
  Recommendation out = *this;
  for (auto& l : out.lists) std::sort(l.begin(), l.end());
  return out;
}

const char* ConstraintName(Constraint c) {
  switch (c) {
    case Constraint::kNone:
      return "none";
    case Constraint::kShape:
      return "shape";
    case Constraint::kSupplyIndex:
      return "supply_index";
    case Constraint::kDuplicateInList:
      return "duplicate_in_list";
    case Constraint::kCap:
      return "recommendation_cap";
    case Constraint::kExclusivity:
      return "supply_exclusivity";
  }
  return "unknown";
}

Verdict ValidateRecommendation(const Instance& instance,
                               const Recommendation& rec) {
  Verdict v;
  if (static_cast<int>(rec.lists.size()) != instance.num_demands) {
    v.violated = Constraint::kShape;
    v.message = "recommendation has " + std::to_string(rec.lists.size()) +
                " lists for " + std::to_string(instance.num_demands) +
                " demands";
    return v;
  }
  std::vector<int> owner(instance.num_supplies, -1);
  for (int i = 0; i < instance.num_demands; ++i) {
    const auto& list = rec.lists[i];
    if (static_cast<int>(list.size()) > instance.theta) {
      v.violated = Constraint::kCap;
      v.demand = i;
      v.message = "demand " + std::to_string(i) + " has " +
                  std::to_string(list.size()) +
                  " recommendations, cap is " + std::to_string(instance.theta);
      return v;
    }
    for (int j : list) {
      if (j < 0 || j >= instance.num_supplies) {
        v.violated = Constraint::kSupplyIndex;
        v.demand = i;
        v.supply = j;
        v.message = "demand " + std::to_string(i) + " lists supply " +
                    std::to_string(j) + " outside [0, " +
                    std::to_string(instance.num_supplies) + ")";
        return v;
      }
      if (owner[j] == i) {
        v.violated = Constraint::kDuplicateInList;
        v.demand = i;
        v.supply = j;
        v.message = "demand " + std::to_string(i) + " lists supply " +
                    std::to_string(j) + " twice";
        return v;
      }
      if (owner[j] >= 0) {
        v.violated = Constraint::kExclusivity;
        v.demand = i;
        v.supply = j;
        v.message = "supply " + std::to_string(j) +
                    " is recommended to demands " + std::to_string(owner[j]) +
                    " and " + std::to_string(i);
        return v;
      }
      owner[j] = i;
    }
  }
  return v;
}

void CheckRecommendation(const Instance& instance, const Recommendation& rec) {
  const Verdict v = ValidateRecommendation(instance, rec);
  if (!v) throw InvalidArgument("invalid recommendation: " + v.message);
}

}  // namespace rtm
