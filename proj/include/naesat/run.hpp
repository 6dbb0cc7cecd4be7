#pragma once
#include <string>

#include <nlohmann/json.hpp>

namespace naesat {

constexpr const char* kToolVersion = "0.1.0";

// command parameters echoed into every artifact; rerunning with them reproduces the payload
struct RunConfig {
    std::string command;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    nlohmann::ordered_json provenance() const;
};

// {"provenance": ..., "payload": ...}
std::string json_artifact(const RunConfig& cfg, const nlohmann::ordered_json& payload);
// first line "# provenance <json>", then the CSV body
std::string csv_artifact(const RunConfig& cfg, const std::string& csv);
// the artifact with its provenance removed
std::string numeric_payload(const std::string& artifact);

}  // namespace naesat
