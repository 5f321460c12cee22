#pragma once

#include <filesystem>
#include <string>

#include "surgeflow/simulation.hpp"

namespace surgeflow::sim {

// Parses and validates a scenario JSON file. Unknown keys are ignored;
// missing optional keys fall back to defaults.
ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(const std::string& json_text);

// Canonical JSON form of a config (stable key order via the JSON library).
std::string canonical_json(const ScenarioConfig& config);

// FNV-1a 64 over the canonical form, as lowercase hex.
std::string scenario_hash(const ScenarioConfig& config);

}  // namespace surgeflow::sim
