#ifndef RTM_JSON_IO_H_
#define RTM_JSON_IO_H_

#include <string>

#include "json.hpp"
#include "rtm/bounds.h"
#include "rtm/evaluation.h"
#include "rtm/instance.h"
#include "rtm/solvers.h"

namespace rtm {

// {"lists": [[supply, ...], ...]}
nlohmann::json RecommendationToJson(const Recommendation& rec);
// Accepts the object form or a bare array of lists. Throws ParseError on
// malformed input.
Recommendation RecommendationFromJson(const nlohmann::json& doc);

nlohmann::json SolveReportToJson(const SolveReport& report);
nlohmann::json EvaluationToJson(const Evaluation& eval);
nlohmann::json BoundReportToJson(const BoundReport& report);

// Model objects, e.g. {"model": "uniform", "lo": 0.7, "hi": 0.9}.
UtilityModel UtilityModelFromJson(const nlohmann::json& doc);
ProbModel ProbModelFromJson(const nlohmann::json& doc);
nlohmann::json UtilityModelToJson(const UtilityModel& model);
nlohmann::json ProbModelToJson(const ProbModel& model);

// {"num_demands", "num_supplies", "theta", "utility", "prob", "seed",
// "label"}; missing models default to synthetic / homogeneous p = 0.8.
GenConfig GenConfigFromJson(const nlohmann::json& doc);

// Reads and parses a whole JSON file; IoError if unreadable, ParseError if
// malformed.
nlohmann::json ReadJsonFile(const std::string& path);
// Writes via a temporary file and rename.
void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace rtm

#endif  // RTM_JSON_IO_H_
