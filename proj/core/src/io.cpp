#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "photofeedback/io.hpp"

namespace photofeedback {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw std::invalid_argument("config " + where + ": " + what);
}

void require_keys(const json& j, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(where, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok) fail(where, "unknown key '" + it.key() + "'");
    }
}

double num(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

Vec2 vec2_from(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) fail(where, "expected [x, y]");
    return {num(j[0], where), num(j[1], where)};
}

json vec2_to(Vec2 v) { return json::array({v.x, v.y}); }

Schedule schedule_from(const json& j, const std::string& where) {
    Schedule s;
    if (!j.is_array()) fail(where, "expected an array of [on, off] pairs");
    for (const auto& iv : j) {
        if (!iv.is_array() || iv.size() != 2) fail(where, "expected [on, off]");
        double a = num(iv[0], where), b = num(iv[1], where);
        if (b <= a) fail(where, "interval end must exceed start");
        s.intervals.emplace_back(a, b);
    }
    return s;
}

json schedule_to(const Schedule& s) {
    json out = json::array();
    for (auto [a, b] : s.intervals) out.push_back(json::array({a, b}));
    return out;
}

MaterialParams material_from(const json& j, const std::string& where) {
    require_keys(j, where,
                 {"heat_capacity_J_K", "heat_loss_W_K", "absorptance",
                  "curvature_coeff_1_mK", "joint_stiffness_Nm_rad",
                  "joint_damping_Nms_rad", "linear_density_kg_m",
                  "ambient_temperature_K"});
    MaterialParams m;
    if (j.contains("heat_capacity_J_K")) m.heat_capacity = num(j["heat_capacity_J_K"], where);
    if (j.contains("heat_loss_W_K")) m.heat_loss = num(j["heat_loss_W_K"], where);
    if (j.contains("absorptance")) m.absorptance = num(j["absorptance"], where);
    if (j.contains("curvature_coeff_1_mK"))
        m.curvature_coeff = num(j["curvature_coeff_1_mK"], where);
    if (j.contains("joint_stiffness_Nm_rad"))
        m.joint_stiffness = num(j["joint_stiffness_Nm_rad"], where);
    if (j.contains("joint_damping_Nms_rad"))
        m.joint_damping = num(j["joint_damping_Nms_rad"], where);
    if (j.contains("linear_density_kg_m"))
        m.linear_density = num(j["linear_density_kg_m"], where);
    if (j.contains("ambient_temperature_K"))
        m.ambient_temperature = num(j["ambient_temperature_K"], where);
    return m;
}

json material_to(const MaterialParams& m) {
    return {{"heat_capacity_J_K", m.heat_capacity},
            {"heat_loss_W_K", m.heat_loss},
            {"absorptance", m.absorptance},
            {"curvature_coeff_1_mK", m.curvature_coeff},
            {"joint_stiffness_Nm_rad", m.joint_stiffness},
            {"joint_damping_Nms_rad", m.joint_damping},
            {"linear_density_kg_m", m.linear_density},
            {"ambient_temperature_K", m.ambient_temperature}};
}

ActuatorGeometry geometry_from(const json& j, const std::string& where) {
    require_keys(j, where,
                 {"length_m", "width_m", "thickness_m", "segment_count",
                  "base_position_m", "base_angle_rad", "rest_curvature_1_m"});
    ActuatorGeometry g;
    if (j.contains("length_m")) g.length = num(j["length_m"], where);
    if (j.contains("width_m")) g.width = num(j["width_m"], where);
    if (j.contains("thickness_m")) g.thickness = num(j["thickness_m"], where);
    if (j.contains("segment_count")) {
        if (!j["segment_count"].is_number_integer())
            fail(where, "segment_count must be an integer");
        g.segment_count = j["segment_count"].get<int>();
    }
    if (j.contains("base_position_m"))
        g.base_position = vec2_from(j["base_position_m"], where);
    if (j.contains("base_angle_rad")) g.base_angle = num(j["base_angle_rad"], where);
    if (j.contains("rest_curvature_1_m")) {
        if (!j["rest_curvature_1_m"].is_array())
            fail(where, "rest_curvature_1_m must be an array");
        for (const auto& v : j["rest_curvature_1_m"])
            g.rest_curvature.push_back(num(v, where));
    }
    return g;
}

json geometry_to(const ActuatorGeometry& g) {
    json j = {{"length_m", g.length},
              {"width_m", g.width},
              {"thickness_m", g.thickness},
              {"segment_count", g.segment_count},
              {"base_position_m", vec2_to(g.base_position)},
              {"base_angle_rad", g.base_angle}};
    if (!g.rest_curvature.empty()) j["rest_curvature_1_m"] = g.rest_curvature;
    return j;
}

Baffle baffle_from(const json& j, const std::string& where) {
    require_keys(j, where,
                 {"attach_segment", "offset_angle_rad", "length_m", "width_m",
                  "opaque", "drag_coefficient"});
    Baffle b;
    if (j.contains("attach_segment")) {
        if (!j["attach_segment"].is_number_integer())
            fail(where, "attach_segment must be an integer");
        b.attach_segment = j["attach_segment"].get<int>();
    }
    if (j.contains("offset_angle_rad")) b.offset_angle = num(j["offset_angle_rad"], where);
    if (j.contains("length_m")) b.length = num(j["length_m"], where);
    if (j.contains("width_m")) b.width = num(j["width_m"], where);
    if (j.contains("opaque")) {
        if (!j["opaque"].is_boolean()) fail(where, "opaque must be a boolean");
        b.opaque = j["opaque"].get<bool>();
    }
    if (j.contains("drag_coefficient"))
        b.drag_coefficient = num(j["drag_coefficient"], where);
    return b;
}

json baffle_to(const Baffle& b) {
    return {{"attach_segment", b.attach_segment},
            {"offset_angle_rad", b.offset_angle},
            {"length_m", b.length},
            {"width_m", b.width},
            {"opaque", b.opaque},
            {"drag_coefficient", b.drag_coefficient}};
}

LightField light_from(const json& j, const std::string& where) {
    require_keys(j, where,
                 {"direction", "intensity_W_m2", "intensity_mW_cm2",
                  "aperture_lo_m", "aperture_hi_m", "schedule_s", "role"});
    LightField l;
    if (j.contains("direction")) l.direction = vec2_from(j["direction"], where);
    if (j.contains("intensity_W_m2") && j.contains("intensity_mW_cm2"))
        fail(where, "give intensity in exactly one unit");
    if (j.contains("intensity_W_m2")) l.intensity = num(j["intensity_W_m2"], where);
    if (j.contains("intensity_mW_cm2"))
        l.intensity = 10.0 * num(j["intensity_mW_cm2"], where);
    if (j.contains("aperture_lo_m")) l.aperture_lo = num(j["aperture_lo_m"], where);
    if (j.contains("aperture_hi_m")) l.aperture_hi = num(j["aperture_hi_m"], where);
    if (j.contains("schedule_s")) l.schedule = schedule_from(j["schedule_s"], where);
    if (j.contains("role")) {
        std::string r = j["role"].get<std::string>();
        if (r == "fuel") l.role = LightRole::fuel;
        else if (r == "trigger") l.role = LightRole::trigger;
        else fail(where, "role must be 'fuel' or 'trigger'");
    }
    return l;
}

json light_to(const LightField& l) {
    return {{"direction", vec2_to(l.direction)},
            {"intensity_W_m2", l.intensity},
            {"aperture_lo_m", l.aperture_lo},
            {"aperture_hi_m", l.aperture_hi},
            {"schedule_s", schedule_to(l.schedule)},
            {"role", l.role == LightRole::fuel ? "fuel" : "trigger"}};
}

Disturbance disturbance_from(const json& j, const std::string& where) {
    require_keys(j, where,
                 {"kind", "magnitude", "direction", "schedule_s",
                  "noise_fraction", "noise_seed"});
    Disturbance d;
    if (j.contains("kind")) {
        std::string k = j["kind"].get<std::string>();
        if (k == "wind") d.kind = DisturbanceKind::wind;
        else if (k == "tip_force") d.kind = DisturbanceKind::tip_force;
        else fail(where, "kind must be 'wind' or 'tip_force'");
    }
    if (j.contains("magnitude")) d.magnitude = num(j["magnitude"], where);
    if (j.contains("direction")) d.direction = vec2_from(j["direction"], where);
    if (j.contains("schedule_s")) d.schedule = schedule_from(j["schedule_s"], where);
    if (j.contains("noise_fraction")) d.noise_fraction = num(j["noise_fraction"], where);
    if (j.contains("noise_seed")) d.noise_seed = j["noise_seed"].get<std::uint64_t>();
    return d;
}

json disturbance_to(const Disturbance& d) {
    return {{"kind", d.kind == DisturbanceKind::wind ? "wind" : "tip_force"},
            {"magnitude", d.magnitude},
            {"direction", vec2_to(d.direction)},
            {"schedule_s", schedule_to(d.schedule)},
            {"noise_fraction", d.noise_fraction},
            {"noise_seed", d.noise_seed}};
}

BodyCoupling body_from(const json& j, const std::string& where) {
    require_keys(j, where,
                 {"kind", "body_mass_kg", "friction_forward", "friction_backward",
                  "thrust_coeff", "linear_drag_Ns_m", "normal_load_N",
                  "wheel_radius_m"});
    BodyCoupling b;
    if (j.contains("kind")) {
        std::string k = j["kind"].get<std::string>();
        if (k == "none") b.kind = BodyKind::none;
        else if (k == "crawler") b.kind = BodyKind::crawler;
        else if (k == "swimmer") b.kind = BodyKind::swimmer;
        else fail(where, "kind must be 'none', 'crawler' or 'swimmer'");
    }
    if (j.contains("body_mass_kg")) b.body_mass = num(j["body_mass_kg"], where);
    if (j.contains("friction_forward")) b.friction_forward = num(j["friction_forward"], where);
    if (j.contains("friction_backward"))
        b.friction_backward = num(j["friction_backward"], where);
    if (j.contains("thrust_coeff")) b.thrust_coeff = num(j["thrust_coeff"], where);
    if (j.contains("linear_drag_Ns_m")) b.linear_drag = num(j["linear_drag_Ns_m"], where);
    if (j.contains("normal_load_N")) b.normal_load = num(j["normal_load_N"], where);
    if (j.contains("wheel_radius_m")) b.wheel_radius = num(j["wheel_radius_m"], where);
    return b;
}

json body_to(const BodyCoupling& b) {
    const char* kind = b.kind == BodyKind::none      ? "none"
                       : b.kind == BodyKind::crawler ? "crawler"
                                                     : "swimmer";
    return {{"kind", kind},
            {"body_mass_kg", b.body_mass},
            {"friction_forward", b.friction_forward},
            {"friction_backward", b.friction_backward},
            {"thrust_coeff", b.thrust_coeff},
            {"linear_drag_Ns_m", b.linear_drag},
            {"normal_load_N", b.normal_load},
            {"wheel_radius_m", b.wheel_radius}};
}

IntegratorSettings integrator_from(const json& j, const std::string& where) {
    require_keys(j, where,
                 {"method", "dt_s", "rel_tol", "abs_tol", "t_end_s",
                  "sample_stride"});
    IntegratorSettings s;
    if (j.contains("method")) {
        std::string m = j["method"].get<std::string>();
        if (m == "rk4_fixed") s.method = IntegrationMethod::rk4_fixed;
        else if (m == "rk45_adaptive") s.method = IntegrationMethod::rk45_adaptive;
        else fail(where, "method must be 'rk4_fixed' or 'rk45_adaptive'");
    }
    if (j.contains("dt_s")) s.dt = num(j["dt_s"], where);
    if (j.contains("rel_tol")) s.rel_tol = num(j["rel_tol"], where);
    if (j.contains("abs_tol")) s.abs_tol = num(j["abs_tol"], where);
    if (j.contains("t_end_s")) s.t_end = num(j["t_end_s"], where);
    if (j.contains("sample_stride")) {
        if (!j["sample_stride"].is_number_integer())
            fail(where, "sample_stride must be an integer");
        s.sample_stride = j["sample_stride"].get<int>();
    }
    return s;
}

json integrator_to(const IntegratorSettings& s) {
    return {{"method", s.method == IntegrationMethod::rk4_fixed ? "rk4_fixed"
                                                                : "rk45_adaptive"},
            {"dt_s", s.dt},
            {"rel_tol", s.rel_tol},
            {"abs_tol", s.abs_tol},
            {"t_end_s", s.t_end},
            {"sample_stride", s.sample_stride}};
}

ScenarioConfig scenario_from_obj(const json& j, const std::string& where) {
    require_keys(j, where,
                 {"schema", "geometry", "material", "baffles", "lights",
                  "disturbances", "body", "integrator", "shadow_smoothing_m",
                  "seed", "delta_t_mode", "overdamped"});
    if (j.contains("schema") && j["schema"].get<int>() != kSchemaVersion)
        fail(where, "unsupported schema version");
    ScenarioConfig c;
    if (j.contains("geometry")) c.geometry = geometry_from(j["geometry"], where + ".geometry");
    if (j.contains("material")) c.material = material_from(j["material"], where + ".material");
    if (j.contains("baffles"))
        for (std::size_t i = 0; i < j["baffles"].size(); ++i)
            c.baffles.push_back(
                baffle_from(j["baffles"][i], where + ".baffles." + std::to_string(i)));
    if (j.contains("lights"))
        for (std::size_t i = 0; i < j["lights"].size(); ++i)
            c.lights.push_back(
                light_from(j["lights"][i], where + ".lights." + std::to_string(i)));
    if (j.contains("disturbances"))
        for (std::size_t i = 0; i < j["disturbances"].size(); ++i)
            c.disturbances.push_back(disturbance_from(
                j["disturbances"][i], where + ".disturbances." + std::to_string(i)));
    if (j.contains("body")) c.body = body_from(j["body"], where + ".body");
    if (j.contains("integrator"))
        c.integrator = integrator_from(j["integrator"], where + ".integrator");
    if (j.contains("shadow_smoothing_m"))
        c.shadow_smoothing = num(j["shadow_smoothing_m"], where);
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("delta_t_mode")) {
        std::string m = j["delta_t_mode"].get<std::string>();
        if (m == "split_mean") c.delta_t_mode = DeltaTMode::split_mean;
        else if (m == "global_mean") c.delta_t_mode = DeltaTMode::global_mean;
        else fail(where, "delta_t_mode must be 'split_mean' or 'global_mean'");
    }
    if (j.contains("overdamped")) c.overdamped = j["overdamped"].get<bool>();
    return c;
}

json scenario_to_obj(const ScenarioConfig& c) {
    json j;
    j["schema"] = kSchemaVersion;
    j["geometry"] = geometry_to(c.geometry);
    j["material"] = material_to(c.material);
    j["baffles"] = json::array();
    for (const auto& b : c.baffles) j["baffles"].push_back(baffle_to(b));
    j["lights"] = json::array();
    for (const auto& l : c.lights) j["lights"].push_back(light_to(l));
    j["disturbances"] = json::array();
    for (const auto& d : c.disturbances) j["disturbances"].push_back(disturbance_to(d));
    j["body"] = body_to(c.body);
    j["integrator"] = integrator_to(c.integrator);
    j["shadow_smoothing_m"] = c.shadow_smoothing;
    j["seed"] = c.seed;
    j["delta_t_mode"] =
        c.delta_t_mode == DeltaTMode::split_mean ? "split_mean" : "global_mean";
    j["overdamped"] = c.overdamped;
    return j;
}

} // namespace

json to_json(const ScenarioConfig& config) { return scenario_to_obj(config); }

json to_json(const ChainConfig& chain) {
    json j;
    j["schema"] = kSchemaVersion;
    j["unit_count"] = chain.unit_count;
    j["unit"] = scenario_to_obj(chain.unit);
    j["shared_lights"] = json::array();
    for (const auto& l : chain.shared_lights) j["shared_lights"].push_back(light_to(l));
    j["spacing_m"] = chain.spacing;
    if (!chain.spacings.empty()) j["spacings_m"] = chain.spacings;
    if (chain.stagger != 0.0) j["stagger_m"] = chain.stagger;
    return j;
}

ScenarioConfig scenario_from_json(const json& j) {
    return scenario_from_obj(j, "scenario");
}

ChainConfig chain_from_json(const json& j) {
    require_keys(j, "chain",
                 {"schema", "unit_count", "unit", "shared_lights", "spacing_m",
                  "spacings_m", "stagger_m"});
    if (j.contains("schema") && j["schema"].get<int>() != kSchemaVersion)
        fail("chain", "unsupported schema version");
    ChainConfig c;
    if (j.contains("unit_count")) {
        if (!j["unit_count"].is_number_integer())
            fail("chain", "unit_count must be an integer");
        c.unit_count = j["unit_count"].get<int>();
    }
    if (j.contains("unit")) c.unit = scenario_from_obj(j["unit"], "chain.unit");
    if (j.contains("shared_lights"))
        for (std::size_t i = 0; i < j["shared_lights"].size(); ++i)
            c.shared_lights.push_back(light_from(
                j["shared_lights"][i], "chain.shared_lights." + std::to_string(i)));
    if (j.contains("spacing_m")) c.spacing = num(j["spacing_m"], "chain");
    if (j.contains("spacings_m"))
        for (const auto& v : j["spacings_m"])
            c.spacings.push_back(num(v, "chain.spacings_m"));
    if (j.contains("stagger_m")) c.stagger = num(j["stagger_m"], "chain");
    return c;
}

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

std::string fnv1a(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

} // namespace

ScenarioConfig load_scenario_file(const std::string& path) {
    return scenario_from_json(load_json_file(path));
}

ChainConfig load_chain_file(const std::string& path) {
    return chain_from_json(load_json_file(path));
}

std::string config_hash(const ScenarioConfig& config) {
    return fnv1a(to_json(config).dump());
}

std::string config_hash(const ChainConfig& chain) {
    return fnv1a(to_json(chain).dump());
}

void write_trace_csv(const std::string& path, const Trace& trace, int unit_count) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out.precision(17);
    out << "t_s,d_m,delta_alpha_rad,mean_curvature_1_m,delta_T_split_K,"
           "delta_T_global_K,absorbed_power_W,body_x_m";
    for (int u = 0; u < unit_count; ++u) out << ",unit" << u << "_d_m";
    out << "\n";
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const auto& r = trace.records[i];
        out << trace.times[i] << ',' << r.d << ',' << r.delta_alpha << ','
            << r.mean_curvature << ',' << r.delta_T_split << ','
            << r.delta_T_global << ',' << r.absorbed_power << ',' << r.body_x;
        for (int u = 0; u < unit_count; ++u)
            out << ',' << (u < (int)r.unit_d.size() ? r.unit_d[u] : 0.0);
        out << "\n";
    }
}

void write_table_csv(const std::string& path,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out.precision(17);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

json summary_to_json(const RunSummary& summary) {
    json j;
    j["schema"] = kSchemaVersion;
    j["scenario"] = summary.scenario;
    j["config_hash"] = summary.config_hash;
    j["seed"] = summary.seed;
    j["wall_time_s"] = summary.wall_time_s;
    j["metrics"] = summary.metrics;
    j["checks"] = json::array();
    for (const auto& c : summary.checks)
        j["checks"].push_back(
            {{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["all_passed"] = summary.all_passed;
    return j;
}

std::pair<std::vector<double>, std::vector<double>>
read_trace_column(const std::string& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open trace file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("empty trace file: " + path);
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    int col = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == column) col = (int)i;
    if (col < 0)
        throw std::invalid_argument("trace file has no column '" + column + "'");

    std::pair<std::vector<double>, std::vector<double>> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        int i = 0;
        double t = 0, v = 0;
        while (std::getline(ss, cell, ',')) {
            if (i == 0) t = std::stod(cell);
            if (i == col) v = std::stod(cell);
            ++i;
        }
        out.first.push_back(t);
        out.second.push_back(v);
    }
    return out;
}

} // namespace photofeedback
