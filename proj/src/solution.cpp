#include "elect/solution.hpp"

#include "elect/json_util.hpp"

namespace elect {

using nlohmann::json;

SolutionFile parse_solution(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("solution is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("solution must be a JSON object");
  if (!j.contains("committee") || !j["committee"].is_array())
    throw ValidationError("missing array field: committee");
  SolutionFile f;
  for (const auto& c : j["committee"]) {
    if (!c.is_string()) throw ValidationError("committee entries must be names");
    f.committee.push_back(c.get<std::string>());
  }
  if (j.contains("weights")) {
    if (!j["weights"].is_array()) throw ValidationError("weights must be an array");
    for (const auto& w : j["weights"]) {
      if (!w.is_object() || !w.contains("voter") || !w.contains("candidate") ||
          !w.contains("value"))
        throw ValidationError("weight entries need voter, candidate, value");
      SolutionFile::Entry entry;
      entry.voter = w["voter"].get<std::string>();
      entry.candidate = w["candidate"].get<std::string>();
      try {
        entry.value = rational_from_json(w["value"]);
      } catch (const std::invalid_argument& e) {
        throw ValidationError("bad weight for " + entry.voter + "->" +
                              entry.candidate + ": " + e.what());
      }
      f.entries.push_back(std::move(entry));
    }
  }
  return f;
}

std::string serialize_solution(const SolutionFile& file) {
  json j;
  j["committee"] = json::array();
  for (const auto& name : file.committee) j["committee"].push_back(name);
  j["weights"] = json::array();
  for (const auto& entry : file.entries) {
    json e;
    e["voter"] = entry.voter;
    e["candidate"] = entry.candidate;
    e["value"] = rational_to_json(entry.value);
    j["weights"].push_back(std::move(e));
  }
  return j.dump();
}

}  // namespace elect
