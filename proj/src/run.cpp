#include "naesat/run.hpp"

namespace naesat {

nlohmann::ordered_json RunConfig::provenance() const {
    nlohmann::ordered_json p;
    p["tool"] = "naesat";
    p["version"] = kToolVersion;
    p["command"] = command;
    p["config"] = params;
    return p;
}

std::string json_artifact(const RunConfig& cfg, const nlohmann::ordered_json& payload) {
    nlohmann::ordered_json j;
    j["provenance"] = cfg.provenance();
    j["payload"] = payload;
    return j.dump(2) + "\n";
}

std::string csv_artifact(const RunConfig& cfg, const std::string& csv) {
    return "# provenance " + cfg.provenance().dump() + "\n" + csv;
}

std::string numeric_payload(const std::string& artifact) {
    if (artifact.rfind("# provenance ", 0) == 0) {
        auto nl = artifact.find('\n');
        return nl == std::string::npos ? "" : artifact.substr(nl + 1);
    }
    auto j = nlohmann::ordered_json::parse(artifact, nullptr, false);
    if (j.is_object() && j.contains("payload")) return j["payload"].dump();
    return artifact;
}

}  // namespace naesat
