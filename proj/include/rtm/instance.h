#ifndef RTM_INSTANCE_H_
#define RTM_INSTANCE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rtm {

// Dense row-major matrix of doubles. Rows are demands, columns supplies.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double operator()(int r, int c) const { return data_[Index(r, c)]; }
  double& operator()(int r, int c) { return data_[Index(r, c)]; }

  std::span<const double> row(int r) const {
    return {data_.data() + static_cast<size_t>(r) * cols_,
            static_cast<size_t>(cols_)};
  }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  size_t Index(int r, int c) const {
    return static_cast<size_t>(r) * cols_ + c;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// One recommend-to-match problem: who may be recommended to whom, the
// platform utility of each pair and the probability that the supplier accepts.
struct Instance {
  int num_demands = 0;
  int num_supplies = 0;
  // Maximum number of supplies recommended to one demand.
  int theta = 1;
  Matrix utilities;
  Matrix accept_prob;
  // Only needed by the nearby-priority policy.
  std::optional<Matrix> distances;
  std::string label;
  std::optional<uint64_t> seed;

  // Supply-to-demand ratio.
  double gamma() const {
    return static_cast<double>(num_supplies) / num_demands;
  }

  bool operator==(const Instance&) const = default;
};

// Throws InvalidArgument naming the first offending field or cell.
void ValidateInstance(const Instance& instance);

// True when every acceptance probability equals the first one within `tol`.
bool IsHomogeneous(const Instance& instance, double tol = 1e-12);

double MinAcceptProb(const Instance& instance);
double MaxAcceptProb(const Instance& instance);

// The set of supplies recommended to each demand.
struct Recommendation {
  std::vector<std::vector<int>> lists;

  static Recommendation Empty(int num_demands) {
    return Recommendation{std::vector<std::vector<int>>(num_demands)};
  }

  int TotalSize() const;
  // Copy with every list sorted ascending; equal recommendations compare equal.
  Recommendation Canonical() const;

  bool operator==(const Recommendation&) const = default;
};

enum class Constraint {
  kNone,
  kShape,            // wrong number of lists
  kSupplyIndex,      // index outside [0, num_supplies)
  kDuplicateInList,  // same supply twice for one demand
  kCap,              // more than theta supplies for one demand
  kExclusivity,      // supply recommended to two demands
};

const char* ConstraintName(Constraint c);

struct Verdict {
  Constraint violated = Constraint::kNone;
  int demand = -1;
  int supply = -1;
  std::string message;

  bool valid() const { return violated == Constraint::kNone; }
  explicit operator bool() const { return valid(); }
};

Verdict ValidateRecommendation(const Instance& instance,
                               const Recommendation& rec);

// Throws InvalidArgument with the verdict message when `rec` is infeasible.
void CheckRecommendation(const Instance& instance, const Recommendation& rec);

// ---------------------------------------------------------------------------
// Instance generators.

// u_ij = 0.4 + 0.2 u_i^D + 0.2 u_j^S + 0.2 u_ij^R, components uniform on [0,1].
struct Synthetic3Part {};
// u_ij uniform on [lo_i, hi_i]. Vectors of size 1 apply to every demand.
struct UniformUtility {
  std::vector<double> lo;
  std::vector<double> hi;
};
// Freight-platform calibration: evaluation scores, revenue, distance and
// route familiarity. Also fills the distance matrix.
struct CaseLikeUtility {};
// ceil(gamma * num_demands / theta) rows valued b, everything else a.
struct AdversarialUtility {
  double a = 1.0;
  double b = 1.1;
};
using UtilityModel = std::variant<Synthetic3Part, UniformUtility,
                                  CaseLikeUtility, AdversarialUtility>;

struct HomogeneousProb {
  double p = 0.8;
};
struct UniformProb {
  double lo = 0.7;
  double hi = 0.9;
};
// Driver historical rate plus distance/familiarity adjustments. Requires
// CaseLikeUtility.
struct CaseLikeProb {};
using ProbModel = std::variant<HomogeneousProb, UniformProb, CaseLikeProb>;

struct GenConfig {
  int num_demands = 1;
  int num_supplies = 1;
  int theta = 1;
  UtilityModel utility_model = Synthetic3Part{};
  ProbModel prob_model = HomogeneousProb{};
  uint64_t seed = 0;
  std::string label;
};

// Dispatches on the utility model. Identical configs give identical instances.
Instance Generate(const GenConfig& cfg);

Instance GenerateSynthetic(const GenConfig& cfg);
Instance GenerateUniform(const GenConfig& cfg);
Instance GenerateCaseLike(const GenConfig& cfg);

// Worst case for the direct assignment policy. num_supplies = gamma *
// num_demands must be integral; the first ceil(num_supplies / theta) demands
// get utility b for every supply.
Instance GenerateAdversarialDap(int num_demands, int theta, double gamma,
                                double a, double b, double p, uint64_t seed);

// Number of all-b rows GenerateAdversarialDap produces.
int AdversarialHighRowCount(int num_supplies, int theta);

// Inverse CDF of the driver historical acceptance rate: piecewise linear
// through (0.5%, 0.05), (25%, 0.45), (50%, 0.64), (75%, 0.76),
// (96.9%, 0.95), with linear tails to 0 and 1.
double HistoricalAcceptanceQuantile(double u);

// p_ij from the driver's historical rate and the relative distance and
// familiarity scores in [-1, 1]. Rates outside [0.05, 0.95] are not adjusted.
double CaseLikeAcceptance(double p_hist, double rel_distance,
                          double rel_familiarity);

// ---------------------------------------------------------------------------
// Instance files: one JSON document, see docs/instance_schema.md.

inline constexpr int kInstanceSchemaVersion = 1;

std::string InstanceToJson(const Instance& instance);
// Throws ParseError for malformed documents, InvalidArgument for documents
// that parse but violate instance invariants.
Instance InstanceFromJson(const std::string& text);

void SaveInstance(const Instance& instance, const std::string& path);
Instance LoadInstance(const std::string& path);

}  // namespace rtm

#endif  // RTM_INSTANCE_H_
