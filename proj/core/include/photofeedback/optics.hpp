#pragma once

#include <string>
#include <vector>

#include "photofeedback/model.hpp"

namespace photofeedback {

struct SceneElement {
    Vec2 a, b;              // endpoints
    bool is_baffle = false;
    int unit = 0;           // owning actuator (chains)
    int index = 0;          // segment index, or baffle id
    bool opaque = true;
    double absorptance = 0.0; // heat fraction for actuator segments, 0 for baffles
};

struct Beam {
    Vec2 direction;         // unit propagation direction
    double intensity = 0.0; // W/m^2
    double aperture_lo = 0.0;
    double aperture_hi = 0.0; // transverse interval, m
};

// Rebuilt from the current state on every evaluation; holds no caches.
struct ShadowScene {
    std::vector<SceneElement> elements;
    Beam beam;
    double width = 1.0;     // out-of-plane width, m (power per aperture meter)
};

struct IlluminationResult {
    std::vector<double> fraction;        // f_i in [0,1] per element
    std::vector<double> incidence;       // |cos gamma_i| per element
    std::vector<double> signed_incidence;// -n_i . beam (front face lit when > 0)
    std::vector<double> absorbed;        // P_i, W (actuator heat; 0 for baffles)
    double entering = 0.0;               // W
    double blocked = 0.0;                // W, received by opaque baffles
    double unabsorbed = 0.0;             // W, reflected by actuator segments
    double transmitted = 0.0;            // W
};

// 2D shadow casting with front-to-back occlusion. Edges of each opaque
// element block through a linear ramp of width eps_s centred on the edge, so
// every fraction is Lipschitz in the element positions with constant 1/eps_s.
// Power balance (entering = absorbed + blocked + unabsorbed + transmitted)
// holds pointwise per ray, hence to rounding for the integrals.
IlluminationResult cast_shadows(const ShadowScene& scene, double eps_s);

// Builds the scene seen by one light for a set of actuators.
ShadowScene build_scene(const LightField& light,
                        const std::vector<ScenarioConfig>& units,
                        const std::vector<SystemState>& unit_states,
                        Vec2 base_shift = {});

enum class FeedbackSign { positive, negative, none };

struct FeedbackProbeResult {
    FeedbackSign sign = FeedbackSign::none;
    double gain_ratio = 0.0; // relative superlinearity of steady absorbed power
};

// Compares steady-state absorbed power at I and I+delta against the linear
// no-deformation baseline. Requires a unique steady state at both intensities.
// Throws std::runtime_error("ambiguous steady state...") if bistable.
FeedbackProbeResult feedback_sign_probe(const ScenarioConfig& config,
                                        double intensity, double delta);

// --- Reduced 1-DOF illuminated-area models (bend / twist / spring modes) ---

enum class ReducedMode { bend, twist, spring, table };

struct ReducedAreaModel {
    ReducedMode mode = ReducedMode::table;
    double area_max = 1e-4;         // A_max, m^2
    // Built-in families use q_align / q in rad; table overrides them.
    double q_align = 0.0;
    std::vector<std::pair<double, double>> table; // (q, A) pairs, q ascending

    double domain_lo() const;
    double domain_hi() const;
    double area(double q) const;    // piecewise-linear for tables, clamped
};

struct ReducedPower {
    double power = 0.0;             // W
    bool out_of_domain = false;     // q clamped to the table domain
};

ReducedPower reduced_absorbed_power(const ReducedAreaModel& model,
                                    double q, double intensity,
                                    double absorptance);

// Self-consistent steady deformation of the 1-DOF reduced model:
//   q = q0 + gain * s,  s = a I A(q) / (h A_max)
// solved by damped fixed-point iteration continued from q_guess.
struct ReducedModelSystem {
    ReducedAreaModel area;
    double q0 = 0.0;        // rest coordinate
    double gain = 1.0;      // deformation per unit thermal state
    double heat_loss = 1.0; // h, W/K
    double absorptance = 0.9;
};

double reduced_steady(const ReducedModelSystem& sys, double intensity, double q_guess);

// Per-point feedback sign along a reduced-model intensity sweep, by the same
// superlinearity criterion as feedback_sign_probe.
std::vector<FeedbackSign> reduced_feedback_signs(const ReducedModelSystem& sys,
                                                 const std::vector<double>& intensities,
                                                 double tol = 1e-3);

} // namespace photofeedback
