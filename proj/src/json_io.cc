#include "rtm/json_io.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "rtm/errors.h"

namespace rtm {
namespace {

using nlohmann::json;

// Non-finite doubles become null; JSON has no representation for them.
json Number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void AllowKeys(const json& doc, const std::string& what,
               std::initializer_list<const char*> keys) {
  if (!doc.is_object()) throw InvalidArgument(what + " must be an object");
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) {
      throw InvalidArgument("unknown key '" + key + "' in " + what);
    }
  }
}

template <class T>
T Get(const json& doc, const char* key, const std::string& what) {
  if (!doc.contains(key)) {
    throw InvalidArgument(what + " lacks '" + key + "'");
  }
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(what + " field '" + key + "' has the wrong type");
  }
}

template <class T>
T GetOr(const json& doc, const char* key, const std::string& what, T dflt) {
  return doc.contains(key) ? Get<T>(doc, key, what) : dflt;
}

std::vector<double> NumberOrList(const json& doc, const char* key,
                                 const std::string& what) {
  if (!doc.contains(key)) throw InvalidArgument(what + " lacks '" + key + "'");
  const json& v = doc.at(key);
  if (v.is_number()) return {v.get<double>()};
  return Get<std::vector<double>>(doc, key, what);
}

}  // namespace

json RecommendationToJson(const Recommendation& rec) {
  json lists = json::array();
  for (const auto& list : rec.lists) lists.push_back(json(list));
  return json{{"lists", lists}};
}

Recommendation RecommendationFromJson(const json& doc) {
  const json* lists = &doc;
  if (doc.is_object()) {
    if (!doc.contains("lists")) {
      throw ParseError("recommendation object lacks 'lists'");
    }
    lists = &doc.at("lists");
  }
  if (!lists->is_array()) throw ParseError("recommendation lists not an array");
  Recommendation rec;
  for (const json& list : *lists) {
    if (!list.is_array()) throw ParseError("recommendation list not an array");
    std::vector<int> supplies;
    for (const json& j : list) {
      if (!j.is_number_integer()) {
        throw ParseError("recommendation entries must be integers");
      }
      supplies.push_back(j.get<int>());
    }
    rec.lists.push_back(std::move(supplies));
  }
  return rec;
}

json SolveReportToJson(const SolveReport& report) {
  json doc;
  doc["method"] = report.method;
  doc["solver_objective"] = Number(report.solver_objective);
  doc["exact_value"] = Number(report.exact_value);
  doc["wall_time_s"] = report.wall_time;
  doc["iterations"] = report.iterations;
  doc["upper_bound"] =
      report.upper_bound ? Number(*report.upper_bound) : json(nullptr);
  doc["certified_optimal"] = report.certified_optimal;
  doc["hit_time_limit"] = report.hit_time_limit;
  doc["recommendation"] = RecommendationToJson(report.rec);
  return doc;
}

json EvaluationToJson(const Evaluation& eval) {
  json doc;
  doc["method"] = EvalMethodName(eval.method);
  doc["total"] = Number(eval.total);
  doc["per_demand"] = eval.per_demand;
  doc["std_error"] = eval.std_error ? Number(*eval.std_error) : json(nullptr);
  doc["samples"] = eval.samples;
  return doc;
}

json BoundReportToJson(const BoundReport& report) {
  json doc;
  doc["gap_bound"] = Number(report.gap_bound);
  doc["numerator"] = Number(report.numerator);
  doc["denominator"] = Number(report.denominator);
  json components = json::object();
  for (const auto& [label, value] : report.components) {
    components[label] = Number(value);
  }
  doc["components"] = components;
  doc["guaranteed"] = report.guaranteed;
  doc["unbounded"] = report.unbounded;
  doc["note"] = report.note;
  return doc;
}

UtilityModel UtilityModelFromJson(const json& doc) {
  const std::string what = "utility model";
  const std::string model = Get<std::string>(doc, "model", what);
  if (model == "synthetic") {
    AllowKeys(doc, what, {"model"});
    return Synthetic3Part{};
  }
  if (model == "uniform") {
    AllowKeys(doc, what, {"model", "lo", "hi"});
    return UniformUtility{NumberOrList(doc, "lo", what),
                          NumberOrList(doc, "hi", what)};
  }
  if (model == "case_like") {
    AllowKeys(doc, what, {"model"});
    return CaseLikeUtility{};
  }
  if (model == "adversarial") {
    AllowKeys(doc, what, {"model", "a", "b"});
    return AdversarialUtility{Get<double>(doc, "a", what),
                              Get<double>(doc, "b", what)};
  }
  throw InvalidArgument("unknown utility model '" + model +
                        "' (expected synthetic, uniform, case_like or "
                        "adversarial)");
}

ProbModel ProbModelFromJson(const json& doc) {
  const std::string what = "probability model";
  const std::string model = Get<std::string>(doc, "model", what);
  if (model == "homogeneous") {
    AllowKeys(doc, what, {"model", "p"});
    return HomogeneousProb{Get<double>(doc, "p", what)};
  }
  if (model == "uniform") {
    AllowKeys(doc, what, {"model", "lo", "hi"});
    return UniformProb{Get<double>(doc, "lo", what),
                       Get<double>(doc, "hi", what)};
  }
  if (model == "case_like") {
    AllowKeys(doc, what, {"model"});
    return CaseLikeProb{};
  }
  throw InvalidArgument("unknown probability model '" + model +
                        "' (expected homogeneous, uniform or case_like)");
}

json UtilityModelToJson(const UtilityModel& model) {
  struct Visitor {
    json operator()(const Synthetic3Part&) const {
      return {{"model", "synthetic"}};
    }
    json operator()(const UniformUtility& m) const {
      return {{"model", "uniform"}, {"lo", m.lo}, {"hi", m.hi}};
    }
    json operator()(const CaseLikeUtility&) const {
      return {{"model", "case_like"}};
    }
    json operator()(const AdversarialUtility& m) const {
      return {{"model", "adversarial"}, {"a", m.a}, {"b", m.b}};
    }
  };
  return std::visit(Visitor{}, model);
}

json ProbModelToJson(const ProbModel& model) {
  struct Visitor {
    json operator()(const HomogeneousProb& m) const {
      return {{"model", "homogeneous"}, {"p", m.p}};
    }
    json operator()(const UniformProb& m) const {
      return {{"model", "uniform"}, {"lo", m.lo}, {"hi", m.hi}};
    }
    json operator()(const CaseLikeProb&) const {
      return {{"model", "case_like"}};
    }
  };
  return std::visit(Visitor{}, model);
}

GenConfig GenConfigFromJson(const json& doc) {
  const std::string what = "generator config";
  AllowKeys(doc, what,
            {"num_demands", "num_supplies", "theta", "utility", "prob", "seed",
             "label"});
  GenConfig cfg;
  cfg.num_demands = Get<int>(doc, "num_demands", what);
  cfg.num_supplies = Get<int>(doc, "num_supplies", what);
  cfg.theta = Get<int>(doc, "theta", what);
  if (doc.contains("utility")) {
    cfg.utility_model = UtilityModelFromJson(doc.at("utility"));
  }
  if (doc.contains("prob")) cfg.prob_model = ProbModelFromJson(doc.at("prob"));
  cfg.seed = GetOr<uint64_t>(doc, "seed", what, 0);
  cfg.label = GetOr<std::string>(doc, "label", what, "");
  return cfg;
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void WriteTextFile(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out << text;
    if (!out) throw IoError("write to " + tmp + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path);
}

}  // namespace rtm
