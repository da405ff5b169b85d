#pragma once

#include <string>
#include <vector>

#include "photofeedback/model.hpp"
#include "photofeedback/scenarios.hpp"

#include <nlohmann/json_fwd.hpp>

namespace photofeedback {

// JSON (de)serialization of the scenario schema (schema 1). Unknown keys are
// errors. Intensities accept either "intensity_W_m2" or "intensity_mW_cm2".
nlohmann::json to_json(const ScenarioConfig& config);
nlohmann::json to_json(const ChainConfig& chain);
ScenarioConfig scenario_from_json(const nlohmann::json& j);
ChainConfig chain_from_json(const nlohmann::json& j);

ScenarioConfig load_scenario_file(const std::string& path);
ChainConfig load_chain_file(const std::string& path);

// FNV-1a over the canonical serialized form; platform-stable.
std::string config_hash(const ScenarioConfig& config);
std::string config_hash(const ChainConfig& chain);

void write_trace_csv(const std::string& path, const Trace& trace, int unit_count = 1);
void write_table_csv(const std::string& path,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);
nlohmann::json summary_to_json(const RunSummary& summary);

// Trace columns (t_s, d_m, ...) parsed back for `spectrum <trace.csv>`.
std::pair<std::vector<double>, std::vector<double>>
read_trace_column(const std::string& path, const std::string& column);

} // namespace photofeedback
