#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "photofeedback/vec2.hpp"

namespace photofeedback {

// All quantities are SI internally. Config files may give light intensity in
// mW/cm^2 (1 mW/cm^2 = 10 W/m^2); the JSON layer converts on load.

struct MaterialParams {
    double heat_capacity = 1e-3;      // C, J/K per segment
    double heat_loss = 1e-4;          // h, W/K per segment
    double absorptance = 0.9;         // a, fraction of incident power
    double curvature_coeff = 1.0;     // beta, 1/(m*K), signed; >0 bends toward the lit face
    double joint_stiffness = 1e-5;    // k, N*m/rad
    double joint_damping = 1e-7;      // c, N*m*s/rad
    double linear_density = 0.02;     // rho, kg/m
    double ambient_temperature = 293.15; // T_amb, K
};

struct ActuatorGeometry {
    double length = 0.015;            // L, m
    double width = 0.002;             // w, m
    double thickness = 1e-4;          // t, m
    int segment_count = 32;           // N
    Vec2 base_position{0.0, 0.0};
    double base_angle = 0.0;          // rad, tangent of the (virtual) segment before joint 0
    std::vector<double> rest_curvature; // kappa0 per segment, 1/m; empty = all zero

    double segment_length() const { return length / segment_count; }
};

// Marker for a baffle attached at the actuator tip (last segment).
inline constexpr int kAttachTip = -1;

struct Baffle {
    int attach_segment = kAttachTip;  // 0..N-1, or kAttachTip
    double offset_angle = 0.0;        // rad relative to the attached segment tangent
    double length = 0.005;            // m
    double width = 0.005;             // m, used for drag area
    bool opaque = true;
    double drag_coefficient = 1.2;    // Cd
};

struct Schedule {
    // Empty means "always on".
    std::vector<std::pair<double, double>> intervals;

    bool active(double t) const {
        if (intervals.empty()) return true;
        for (auto [a, b] : intervals)
            if (t >= a && t < b) return true;
        return false;
    }
};

enum class LightRole { fuel, trigger };

struct LightField {
    Vec2 direction{0.0, -1.0};        // unit propagation direction
    double intensity = 0.0;           // I, W/m^2
    double aperture_lo = -0.05;       // interval on the transverse axis, m
    double aperture_hi = 0.05;
    Schedule schedule;
    LightRole role = LightRole::fuel;
};

enum class DisturbanceKind { wind, tip_force };

struct Disturbance {
    DisturbanceKind kind = DisturbanceKind::wind;
    double magnitude = 0.0;           // wind speed m/s, or force N
    Vec2 direction{1.0, 0.0};
    Schedule schedule;
    double noise_fraction = 0.0;      // zero-mean Gaussian gust fraction
    std::uint64_t noise_seed = 0;
};

enum class BodyKind { none, crawler, swimmer };

struct BodyCoupling {
    BodyKind kind = BodyKind::none;
    double body_mass = 23e-6;         // m_b, kg
    double friction_forward = 0.0;    // mu_f (crawler)
    double friction_backward = 0.0;   // mu_b (crawler)
    double thrust_coeff = 0.0;        // k_t, N*s^2/m^2 (swimmer)
    double linear_drag = 1e-4;        // c_d, N*s/m (swimmer)
    double normal_load = 0.0;         // N (crawler)
    double wheel_radius = 2.5e-3;     // m (crawler reaction lever)
};

enum class IntegrationMethod { rk4_fixed, rk45_adaptive };

struct IntegratorSettings {
    IntegrationMethod method = IntegrationMethod::rk4_fixed;
    double dt = 1e-4;                 // s, fixed-step size
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
    double t_end = 10.0;              // s
    int sample_stride = 10;
};

enum class DeltaTMode { split_mean, global_mean };

struct ScenarioConfig {
    ActuatorGeometry geometry;
    MaterialParams material;
    std::vector<Baffle> baffles;
    std::vector<LightField> lights;
    std::vector<Disturbance> disturbances;
    BodyCoupling body;
    IntegratorSettings integrator;
    double shadow_smoothing = 0.0;    // eps_s, m; 0 = default L/200
    std::uint64_t seed = 0;
    DeltaTMode delta_t_mode = DeltaTMode::split_mean;
    bool overdamped = false;          // drop inertia (first-order mechanics)
};

// Per-segment state. T[] stores the effective bending temperature: ambient
// plus a signed photothermal elevation whose sign records which face of the
// segment was heated (front face = left of the tangent). For scenarios where
// one face stays lit it coincides with the segment temperature.
struct SystemState {
    std::vector<double> theta;        // rad, absolute segment angles
    std::vector<double> omega;        // rad/s
    std::vector<double> T;            // K
    std::optional<double> body_x;     // m
    std::optional<double> body_v;     // m/s
    double time = 0.0;
};

struct ObservablesRecord {
    double d = 0.0;                   // tip transverse displacement, m
    double delta_alpha = 0.0;         // tip tangent change vs rest, rad
    double mean_curvature = 0.0;      // 1/m
    double delta_T_split = 0.0;       // first-half minus second-half mean elevation, K
    double delta_T_global = 0.0;      // mean elevation over all segments, K
    double absorbed_power = 0.0;      // W
    std::vector<double> illuminated_fraction; // per segment
    double body_x = 0.0;
    std::vector<double> unit_d;       // per-unit tip displacement (chains)
};

struct Trace {
    std::vector<double> times;
    std::vector<SystemState> states;
    std::vector<ObservablesRecord> records;
};

struct ChainConfig {
    int unit_count = 2;
    ScenarioConfig unit;              // prototype; bases offset along the transverse axis
    std::vector<LightField> shared_lights;
    double spacing = 0.02;            // m, uniform unit spacing
    std::vector<double> spacings;     // optional per-gap spacing (size unit_count-1)
    double stagger = 0.0;             // m, per-unit depth offset along the beam
};

struct ValidationIssue {
    std::string field;
    std::string message;
};

struct ValidationResult {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
    std::string summary() const;
};

// Fills defaults in place and reports every violated invariant (not just the
// first). A config with a non-empty issue list must not be simulated.
ValidationResult validate(ScenarioConfig& config);
ValidationResult validate(ChainConfig& chain);

// Rest state: T at ambient, omega zero, joint angles at the rest curvature.
SystemState rest_state(const ScenarioConfig& config);

ObservablesRecord observables(const SystemState& state, const ScenarioConfig& config);

// Reflection of config and state about the axis of the primary (first) light.
ScenarioConfig mirror(const ScenarioConfig& config);
SystemState mirror(const SystemState& state, const ScenarioConfig& config);

} // namespace photofeedback
