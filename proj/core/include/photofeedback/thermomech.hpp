#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "photofeedback/model.hpp"
#include "photofeedback/optics.hpp"

namespace photofeedback {

// A simulation world: one or more actuator units sharing the same lights and
// shadow scene. Single-scenario runs are worlds with one unit.
struct World {
    std::vector<ScenarioConfig> units; // geometry/material/baffles per unit
    std::vector<LightField> lights;
    std::vector<Disturbance> disturbances;
    BodyCoupling body;
    IntegratorSettings integrator;
    double shadow_smoothing = 0.0;
    std::uint64_t seed = 0;
    DeltaTMode delta_t_mode = DeltaTMode::split_mean;
    bool overdamped = false;

    int total_segments() const;
    int segment_offset(int unit) const;
    bool has_body() const { return body.kind != BodyKind::none; }
};

World make_world(const ScenarioConfig& config);
World make_world(const ChainConfig& chain);

SystemState rest_state(const World& world);

struct Derivatives {
    std::vector<double> dtheta;
    std::vector<double> domega;
    std::vector<double> dT;
    double dbody_x = 0.0;
    double dbody_v = 0.0;
};

// dT_i/dt = (P_i - h (T_i - T_amb)) / C. `drive` is the signed absorbed
// power (positive = front face heated).
std::vector<double> thermal_rhs(std::span<const double> T,
                                std::span<const double> drive,
                                const MaterialParams& material);

// kappa_eq,i = kappa0,i + beta (T_i - T_amb)
std::vector<double> equilibrium_curvature(std::span<const double> T,
                                          const MaterialParams& material,
                                          const ActuatorGeometry& geometry);

// Generalized torque per segment from wind drag on baffles and tip-force
// disturbances at time t (drag on all joints from base to the load point).
std::vector<double> external_torques(const SystemState& state, double t,
                                     const World& world);

// Damped discrete elastica: joint spring-dampers against the equilibrium
// curvature, diagonal lumped inertia rho*l^3/3 per segment.
std::vector<double> mechanical_rhs(const SystemState& state,
                                   std::span<const double> kappa_eq,
                                   std::span<const double> ext_torque,
                                   const World& world);

struct BodyDerivative {
    double dx = 0.0;
    double dv = 0.0;
};

BodyDerivative body_rhs(const SystemState& state,
                        std::span<const double> joint_torque0,
                        const World& world, double t);

struct RhsDiagnostics {
    double absorbed_power = 0.0;
    std::vector<double> illuminated_fraction; // per segment, all units
    std::vector<double> signed_drive;         // W per segment
};

Derivatives full_rhs(const SystemState& state, double t, const World& world,
                     RhsDiagnostics* diag = nullptr);

// Mechanical + thermal storage functional used by the dissipativity tests.
double energy_functional(const SystemState& state, const World& world,
                         double thermal_scale);

ObservablesRecord observables(const SystemState& state, const World& world);

// Deterministic zero-mean unit-variance gust value, a pure function of
// (seed, t) with a 50 ms correlation interval.
double gust_noise(std::uint64_t seed, double t);

} // namespace photofeedback
