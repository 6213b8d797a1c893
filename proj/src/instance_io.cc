#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "rtm/errors.h"
#include "rtm/instance.h"

namespace rtm {
namespace {

using nlohmann::json;

json MatrixToJson(const Matrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(json(std::vector<double>(row.begin(), row.end())));
  }
  return rows;
}

Matrix MatrixFromJson(const json& doc, const char* name, int rows, int cols) {
  if (!doc.is_array() || static_cast<int>(doc.size()) != rows) {
    throw InvalidArgument(std::string(name) + " must be an array of " +
                          std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = doc[r];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw InvalidArgument(std::string(name) + " row " + std::to_string(r) +
                            " must have " + std::to_string(cols) + " entries");
    }
    for (int c = 0; c < cols; ++c) {
      if (!row[c].is_number()) {
        throw InvalidArgument(std::string(name) + "[" + std::to_string(r) +
                              "][" + std::to_string(c) + "] is not a number");
      }
      m(r, c) = row[c].get<double>();
    }
  }
  return m;
}

template <class T>
T Required(const json& doc, const char* key) {
  if (!doc.contains(key)) {
    throw InvalidArgument(std::string("instance document lacks '") + key + "'");
  }
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("instance field '") + key +
                          "' has the wrong type");
  }
}

}  // namespace

std::string InstanceToJson(const Instance& instance) {
  json doc;
  doc["schema"] = "rtm.instance";
  doc["schema_version"] = kInstanceSchemaVersion;
  doc["label"] = instance.label;
  doc["seed"] = instance.seed ? json(*instance.seed) : json(nullptr);
  doc["num_demands"] = instance.num_demands;
  doc["num_supplies"] = instance.num_supplies;
  doc["theta"] = instance.theta;
  doc["utilities"] = MatrixToJson(instance.utilities);
  doc["accept_prob"] = MatrixToJson(instance.accept_prob);
  if (instance.distances) doc["distances"] = MatrixToJson(*instance.distances);
  return doc.dump(1);
}

Instance InstanceFromJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("instance parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("instance document is not an object");
  const int version = Required<int>(doc, "schema_version");
  if (version != kInstanceSchemaVersion) {
    throw InvalidArgument("unsupported instance schema_version " +
                          std::to_string(version) + " (expected " +
                          std::to_string(kInstanceSchemaVersion) + ")");
  }
  Instance inst;
  inst.num_demands = Required<int>(doc, "num_demands");
  inst.num_supplies = Required<int>(doc, "num_supplies");
  inst.theta = Required<int>(doc, "theta");
  if (inst.num_demands < 1 || inst.num_supplies < 1) {
    throw InvalidArgument("num_demands and num_supplies must be positive");
  }
  if (doc.contains("label")) inst.label = Required<std::string>(doc, "label");
  if (doc.contains("seed") && !doc["seed"].is_null()) {
    inst.seed = Required<uint64_t>(doc, "seed");
  }
  inst.utilities = MatrixFromJson(Required<json>(doc, "utilities"), "utilities",
                                  inst.num_demands, inst.num_supplies);
  inst.accept_prob =
      MatrixFromJson(Required<json>(doc, "accept_prob"), "accept_prob",
                     inst.num_demands, inst.num_supplies);
  if (doc.contains("distances") && !doc["distances"].is_null()) {
    inst.distances = MatrixFromJson(doc["distances"], "distances",
                                    inst.num_demands, inst.num_supplies);
  }
  ValidateInstance(inst);
  return inst;
}

void SaveInstance(const Instance& instance, const std::string& path) {
  ValidateInstance(instance);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out << InstanceToJson(instance) << '\n';
    if (!out) throw IoError("write to " + tmp + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path);
}

Instance LoadInstance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return InstanceFromJson(buf.str());
}

}  // namespace rtm
