#pragma once

#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "photofeedback/analysis.hpp"

namespace photofeedback {

struct PropertyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ScenarioOutputs {
    // Named CSV tables: name -> (header row, data rows).
    std::map<std::string, std::pair<std::vector<std::string>,
                                    std::vector<std::vector<double>>>> tables;
    std::map<std::string, double> metrics;
    std::vector<PropertyCheck> checks;
};

struct ScenarioDescriptor {
    std::string name;
    std::string description;
    std::variant<ScenarioConfig, ChainConfig> base;
    // Runs the scenario's analysis pipeline and its expected-property checks.
    std::function<ScenarioOutputs(const std::variant<ScenarioConfig, ChainConfig>&)> run;
};

const std::vector<ScenarioDescriptor>& list_scenarios();
const ScenarioDescriptor* find_scenario(const std::string& name);

struct RunSummary {
    std::string scenario;
    std::string config_hash;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
    std::map<std::string, double> metrics;
    std::vector<PropertyCheck> checks;
    bool all_passed = false;
};

// Applies dotted-path overrides, runs the scenario, writes trace/summary
// files under out_dir (empty = no files).
RunSummary run_scenario(const std::string& name,
                        const std::vector<std::pair<std::string, std::string>>& overrides,
                        const std::string& out_dir);

// Dotted-path override on a config ("lights.0.intensity=1600"); throws on
// unknown paths. Values are parsed as JSON scalars.
void apply_override(std::variant<ScenarioConfig, ChainConfig>& config,
                    const std::string& path, const std::string& value);

int cli_main(int argc, const char* const* argv);

} // namespace photofeedback
