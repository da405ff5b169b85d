#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "photofeedback/thermomech.hpp"

namespace photofeedback {

enum class Stability { stable, unstable, marginal };

struct SteadyState {
    SystemState state;                  // omega == 0
    Stability stability = Stability::marginal;
    double leading_eigenvalue = 0.0;    // max real part, 1/s
    double residual = 0.0;              // scaled residual norm
    std::string basin_tag;
};

struct ResponseCurve {
    std::vector<double> parameter;      // e.g. intensities, W/m^2
    std::vector<double> observable;     // steady delta_alpha (or other), rad
    bool direction_up = true;
    bool hysteresis = false;
    bool truncated_at_fold = false;
};

Trace integrate(const World& world, const IntegratorSettings& settings);
Trace integrate(const ScenarioConfig& config);

// Continues a trace in place from its last state (schedule-aware).
void integrate_more(Trace& trace, const World& world,
                    const IntegratorSettings& settings, double t_extra);

struct SteadySolveOptions {
    double time_freeze = 0.0;           // schedules evaluated at this time
    int max_newton_iters = 100;
    double residual_tol = 1e-9;
    double dedup_distance = 1e-6;
    bool classify = true;
    // Optional constant tip force (quasi-static continuation support).
    Vec2 tip_force{0.0, 0.0};
};

std::vector<SteadyState> find_steady_states(const World& world,
                                            const std::vector<SystemState>& seeds,
                                            const SteadySolveOptions& opts = {});
std::vector<SteadyState> find_steady_states(const ScenarioConfig& config,
                                            const std::vector<SystemState>& seeds);

// Default seed set {rest, +tilt, -tilt} (0.1 rad at the baffle attachment
// neighbourhood), the documented convention for bistability discovery.
std::vector<SystemState> default_seeds(const World& world, double tilt = 0.1);

// Newton refinement from a single seed; empty when not converged.
std::optional<SteadyState> solve_steady(const World& world, const SystemState& seed,
                                        const SteadySolveOptions& opts = {});

using SteadyObservable = std::function<double(const SteadyState&, const World&)>;

struct SweepOptions {
    bool up = true;
    bool check_hysteresis = true;       // also run the reverse sweep for the flag
    double hysteresis_tol = 1e-3;       // rad
    SteadyObservable observable;        // default: delta_alpha
};

// Continuation over fuel intensity: the solution at value k seeds value k+1.
ResponseCurve sweep_intensity(const ScenarioConfig& config,
                              const std::vector<double>& values,
                              const SweepOptions& opts = {});

Trace run_chain(const ChainConfig& chain, const std::vector<int>& initial_signs,
                const IntegratorSettings& settings);

// Seed state for a chain sign vector (+1 tips right, -1 tips left per unit).
SystemState chain_seed(const World& world, const std::vector<int>& signs,
                       double tilt = 0.1);

} // namespace photofeedback
