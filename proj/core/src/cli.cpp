#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "photofeedback/io.hpp"
#include "photofeedback/scenarios.hpp"

namespace photofeedback {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitProperty = 1;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;

struct GlobalOpts {
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_dir;
    std::string format = "csv";
};

std::uint64_t env_seed() {
    const char* s = std::getenv("PHOTOFEEDBACK_SEED");
    if (!s) return 0;
    try {
        return std::stoull(s);
    } catch (...) {
        return 0;
    }
}

// Loads either a scenario or chain config file, telling them apart by the
// presence of "unit_count".
std::variant<ScenarioConfig, ChainConfig> load_any(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("invalid JSON in " + path + ": " + e.what());
    }
    if (j.contains("unit_count")) return chain_from_json(j);
    return scenario_from_json(j);
}

ScenarioConfig load_validated(const std::string& path, const GlobalOpts& g) {
    ScenarioConfig c = load_scenario_file(path);
    if (g.seed_given) c.seed = g.seed;
    auto issues = validate(c);
    if (!issues.ok()) throw std::invalid_argument(issues.summary());
    return c;
}

void emit(const GlobalOpts& g, const json& j, const std::string& csv_header,
          const std::vector<std::vector<double>>& csv_rows) {
    if (g.format == "json") {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::cout << csv_header << "\n";
    std::cout.precision(17);
    for (const auto& row : csv_rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            std::cout << (i ? "," : "") << row[i];
        std::cout << "\n";
    }
}

int cmd_simulate(const std::string& config_path, const GlobalOpts& g) {
    ScenarioConfig cfg = load_validated(config_path, g);
    Trace trace = integrate(cfg);
    std::string out = g.out_dir.empty() ? "." : g.out_dir;
    std::filesystem::create_directories(out);
    std::string path = out + "/trace.csv";
    write_trace_csv(path, trace);
    json j = {{"schema", 1},
              {"samples", trace.times.size()},
              {"t_end_s", trace.times.back()},
              {"final_d_m", trace.records.back().d},
              {"trace", path}};
    if (g.format == "json")
        std::cout << j.dump(2) << "\n";
    else
        std::cout << "wrote " << path << " (" << trace.times.size()
                  << " samples, final d = " << trace.records.back().d << " m)\n";
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::vector<double>& values, const GlobalOpts& g) {
    if (param != "intensity")
        throw std::invalid_argument("sweep: unsupported parameter '" + param + "'");
    if (values.size() < 2)
        throw std::invalid_argument("sweep: need at least 2 values");
    ScenarioConfig cfg = load_validated(config_path, g);
    auto curve = sweep_intensity(cfg, values);

    json j = {{"schema", 1},
              {"parameter", curve.parameter},
              {"observable", curve.observable},
              {"hysteresis", curve.hysteresis},
              {"truncated_at_fold", curve.truncated_at_fold}};
    if (curve.parameter.size() >= 5) {
        auto m = classify_response(curve);
        j["classification"] = to_string(m.cls);
        j["r_squared"] = m.r_squared;
        j["slope_ratio"] = m.slope_ratio;
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < curve.parameter.size(); ++i)
        rows.push_back({curve.parameter[i], curve.observable[i]});
    emit(g, j, "intensity_W_m2,delta_alpha_rad", rows);
    return kExitOk;
}

int cmd_barrier(const std::string& config_path, double intensity,
                const GlobalOpts& g) {
    ScenarioConfig cfg = load_validated(config_path, g);
    auto b = compute_barrier(cfg, intensity);
    json j = {{"schema", 1},
              {"intensity_W_m2", b.intensity},
              {"barrier_1to2_J", b.barrier_1to2},
              {"barrier_2to1_J", b.barrier_2to1}};
    std::vector<std::vector<double>> rows;
    for (const auto& [d, f] : b.path_1to2) rows.push_back({1.0, d, f});
    for (const auto& [d, f] : b.path_2to1) rows.push_back({2.0, d, f});
    emit(g, j, "branch,displacement_m,force_N", rows);
    return kExitOk;
}

int cmd_spectrum(const std::string& trace_path, const std::string& column,
                 const GlobalOpts& g) {
    auto [times, signal] = read_trace_column(trace_path, column);
    auto sp = spectrum(times, signal, SpectrumWindow::hann);
    json j = {{"schema", 1},
              {"column", column},
              {"dc", sp.dc},
              {"f1_Hz", sp.f1},
              {"f1_amplitude", sp.f1_amplitude},
              {"has_harmonic", sp.has_harmonic}};
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < sp.frequency.size(); ++i)
        rows.push_back({sp.frequency[i], sp.amplitude[i]});
    emit(g, j, "frequency_Hz,amplitude", rows);
    return kExitOk;
}

int cmd_enumerate(const std::string& config_path, double intensity,
                  const GlobalOpts& g) {
    ChainConfig chain = load_chain_file(config_path);
    if (g.seed_given) chain.unit.seed = g.seed;
    auto issues = validate(chain);
    if (!issues.ok()) throw std::invalid_argument(issues.summary());
    double I = intensity > 0 ? intensity
                             : chain.shared_lights.empty()
                                   ? 0.0
                                   : chain.shared_lights.front().intensity;
    auto set = enumerate_states(chain, I);

    auto vecs = [](const std::vector<std::vector<int>>& vs) {
        json a = json::array();
        for (const auto& v : vs) a.push_back(v);
        return a;
    };
    json j = {{"schema", 1},
              {"unit_count", set.unit_count},
              {"observed", vecs(set.observed)},
              {"forbidden", vecs(set.forbidden)},
              {"unresolved", vecs(set.unresolved)}};
    std::vector<std::vector<double>> rows;
    for (const auto& v : set.observed) {
        std::vector<double> row{1.0};
        for (int s : v) row.push_back(s);
        rows.push_back(row);
    }
    for (const auto& v : set.forbidden) {
        std::vector<double> row{0.0};
        for (int s : v) row.push_back(s);
        rows.push_back(row);
    }
    emit(g, j, "observed,signs...", rows);
    return kExitOk;
}

int cmd_threshold(const std::string& config_path, double fuel, double duration,
                  const GlobalOpts& g) {
    ScenarioConfig cfg = load_validated(config_path, g);
    // Trigger template: a trigger-role light in the config wins; otherwise a
    // default oblique beam.
    LightField trigger;
    bool found = false;
    for (auto it = cfg.lights.begin(); it != cfg.lights.end(); ++it) {
        if (it->role == LightRole::trigger) {
            trigger = *it;
            cfg.lights.erase(it);
            found = true;
            break;
        }
    }
    if (!found) {
        double nrm = std::hypot(0.95, 0.312);
        trigger.direction = {0.95 / nrm, -0.312 / nrm};
        trigger.aperture_lo = -0.08;
        trigger.aperture_hi = 0.08;
        trigger.role = LightRole::trigger;
    }
    auto r = switching_threshold(cfg, fuel, trigger, duration);
    json j = {{"schema", 1},
              {"fuel_W_m2", fuel},
              {"duration_s", duration},
              {"threshold_W_m2", r.threshold},
              {"above_cap", r.above_cap},
              {"bisection_iters", r.bisection_iters}};
    emit(g, j, "fuel_W_m2,duration_s,threshold_W_m2",
         {{fuel, duration, r.threshold}});
    return kExitOk;
}

int cmd_calibrate(const std::string& spec_path, const GlobalOpts& g) {
    std::ifstream in(spec_path);
    if (!in) throw std::invalid_argument("cannot open calibration spec: " + spec_path);
    json spec;
    try {
        in >> spec;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("invalid JSON: ") + e.what());
    }

    std::string scenario = spec.value("scenario", "fig3_oscillator");
    const ScenarioDescriptor* desc = find_scenario(scenario);
    if (!desc || !std::holds_alternative<ScenarioConfig>(desc->base))
        throw std::invalid_argument("calibrate: unknown scenario '" + scenario + "'");
    ScenarioConfig base = std::get<ScenarioConfig>(desc->base);

    std::vector<std::string> names;
    std::vector<double> initial, lower, upper;
    for (const auto& p : spec.at("parameters")) {
        names.push_back(p.at("name").get<std::string>());
        initial.push_back(p.at("initial").get<double>());
        lower.push_back(p.at("lower").get<double>());
        upper.push_back(p.at("upper").get<double>());
    }

    auto configured = [&](const std::vector<double>& x) {
        std::variant<ScenarioConfig, ChainConfig> v = base;
        for (std::size_t i = 0; i < names.size(); ++i)
            apply_override(v, names[i], std::to_string(x[i]));
        return std::get<ScenarioConfig>(v);
    };

    std::vector<CalibrationTarget> targets;
    for (const auto& t : spec.at("targets")) {
        CalibrationTarget target;
        std::string kind = t.at("observable").get<std::string>();
        target.name = kind;
        target.target = t.at("value").get<double>();
        target.weight = t.value("weight", 1.0);
        if (kind == "tau_th") {
            target.evaluate = [configured](const std::vector<double>& x) {
                auto c = configured(x);
                return c.material.heat_capacity / c.material.heat_loss;
            };
        } else if (kind == "f1") {
            target.evaluate = [configured](const std::vector<double>& x) {
                auto c = configured(x);
                auto issues = validate(c);
                if (!issues.ok()) return 0.0;
                auto trace = integrate(c);
                return oscillation_metrics(trace).f1;
            };
        } else if (kind == "delta_alpha") {
            target.evaluate = [configured](const std::vector<double>& x) {
                auto c = configured(x);
                auto issues = validate(c);
                if (!issues.ok()) return 0.0;
                World w = make_world(c);
                auto s = solve_steady(w, rest_state(w));
                return s ? observables(s->state, w).delta_alpha : 0.0;
            };
        } else {
            throw std::invalid_argument("calibrate: unknown observable '" + kind + "'");
        }
        targets.push_back(std::move(target));
    }

    CalibrateOptions opts;
    opts.max_evaluations = spec.value("max_evaluations", 500);
    auto result = calibrate(initial, lower, upper, targets, opts);

    json j = {{"schema", 1},
              {"scenario", scenario},
              {"objective", result.objective},
              {"evaluations", result.evaluations}};
    j["parameters"] = json::object();
    for (std::size_t i = 0; i < names.size(); ++i)
        j["parameters"][names[i]] = result.parameters[i];
    j["residuals"] = result.residuals;
    std::cout << j.dump(2) << "\n";
    if (!g.out_dir.empty()) {
        std::filesystem::create_directories(g.out_dir);
        std::ofstream out(g.out_dir + "/calibration.json");
        out << j.dump(2) << "\n";
    }
    return kExitOk;
}

int cmd_scenario(const std::string& name, const std::vector<std::string>& sets,
                 bool all, const GlobalOpts& g) {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& s : sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects path=value, got '" + s + "'");
        overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (g.seed_given) overrides.emplace_back("seed", std::to_string(g.seed));

    std::vector<std::string> names;
    if (all) {
        for (const auto& d : list_scenarios()) names.push_back(d.name);
    } else {
        names.push_back(name);
    }

    bool any_failed = false;
    for (const auto& n : names) {
        RunSummary summary = run_scenario(n, all ? decltype(overrides){} : overrides,
                                          g.out_dir);
        if (g.format == "json") {
            std::cout << summary_to_json(summary).dump(2) << "\n";
        } else {
            std::cout << summary.scenario << ": "
                      << (summary.all_passed ? "PASS" : "FAIL") << " ("
                      << summary.wall_time_s << " s)\n";
            for (const auto& c : summary.checks)
                std::cout << "  [" << (c.passed ? "ok" : "FAIL") << "] " << c.name
                          << ": " << c.detail << "\n";
        }
        if (!summary.all_passed) any_failed = true;
    }
    return any_failed ? kExitProperty : kExitOk;
}

} // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Feedback-regulated photothermal actuator simulator"};
    app.require_subcommand(1);

    GlobalOpts g;
    g.seed = env_seed();
    g.seed_given = std::getenv("PHOTOFEEDBACK_SEED") != nullptr;
    auto* seed_opt = app.add_option("--seed", g.seed, "RNG seed override");
    app.add_option("--out", g.out_dir, "Output directory");
    app.add_option("--format", g.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));

    std::string config_path, trace_path, column = "d_m", param = "intensity";
    std::string scenario_name, calib_spec;
    std::vector<double> values;
    std::vector<std::string> sets;
    double intensity = 0.0, fuel = 0.0, duration = 1.0;
    bool all = false;

    auto* sim = app.add_subcommand("simulate", "Integrate a scenario config");
    sim->add_option("config", config_path, "Scenario JSON file")->required();

    auto* sweep = app.add_subcommand("sweep", "Steady-state parameter sweep");
    sweep->add_option("config", config_path)->required();
    sweep->add_option("--param", param, "Swept parameter (intensity)");
    sweep->add_option("--values", values, "Parameter values")->required();

    auto* barrier = app.add_subcommand("barrier", "Quasi-static energy barriers");
    barrier->add_option("config", config_path)->required();
    barrier->add_option("--intensity", intensity, "Fuel intensity, W/m^2")->required();

    auto* spec = app.add_subcommand("spectrum", "DFT of a trace column");
    spec->add_option("trace", trace_path, "Trace CSV file")->required();
    spec->add_option("--column", column, "Column name (default d_m)");

    auto* enumer = app.add_subcommand("enumerate", "Chain state enumeration");
    enumer->add_option("config", config_path, "Chain JSON file")->required();
    enumer->add_option("--intensity", intensity, "Fuel intensity, W/m^2");

    auto* thresh = app.add_subcommand("threshold", "Trigger switching threshold");
    thresh->add_option("config", config_path)->required();
    thresh->add_option("--fuel", fuel, "Fuel intensity, W/m^2")->required();
    thresh->add_option("--duration", duration, "Trigger duration, s");

    auto* calib = app.add_subcommand("calibrate", "Derivative-free parameter fit");
    calib->add_option("spec", calib_spec, "Calibration spec JSON")->required();

    auto* scen = app.add_subcommand("scenario", "Run a registered scenario");
    scen->add_option("name", scenario_name, "Scenario name");
    scen->add_option("--set", sets, "Dotted-path override path=value");
    scen->add_flag("--all", all, "Run every registered scenario");

    auto* list = app.add_subcommand("list", "List registered scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }
    g.seed_given = g.seed_given || seed_opt->count() > 0;

    try {
        if (*sim) return cmd_simulate(config_path, g);
        if (*sweep) return cmd_sweep(config_path, param, values, g);
        if (*barrier) return cmd_barrier(config_path, intensity, g);
        if (*spec) return cmd_spectrum(trace_path, column, g);
        if (*enumer) return cmd_enumerate(config_path, intensity, g);
        if (*thresh) return cmd_threshold(config_path, fuel, duration, g);
        if (*calib) return cmd_calibrate(calib_spec, g);
        if (*scen) {
            if (!all && scenario_name.empty()) {
                std::cerr << "scenario: name required (or --all)\n";
                return kExitUsage;
            }
            if (!all && !find_scenario(scenario_name)) {
                std::cerr << "unknown scenario: " << scenario_name << "\n";
                return kExitUsage;
            }
            return cmd_scenario(scenario_name, sets, all, g);
        }
        if (*list) {
            for (const auto& d : list_scenarios())
                std::cout << d.name << "  -  " << d.description << "\n";
            return kExitOk;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitProperty;
    }
    return kExitUsage;
}

} // namespace photofeedback
