#include <cmath>
#include <stdexcept>

#include "photofeedback/dynamics.hpp"

namespace photofeedback {

namespace {

// Steady absorbed power at a given intensity; throws on bistability.
double steady_absorbed(ScenarioConfig cfg, double intensity) {
    cfg.lights.front().intensity = intensity;
    World world = make_world(cfg);
    auto states = find_steady_states(world, default_seeds(world));
    int stable = 0;
    const SteadyState* pick = nullptr;
    for (const auto& s : states) {
        if (s.stability != Stability::unstable) {
            ++stable;
            pick = &s;
        }
    }
    if (stable > 1)
        throw std::runtime_error("ambiguous steady state; use find_steady_states");
    if (!pick)
        throw std::runtime_error("no stable steady state found at intensity " +
                                 std::to_string(intensity));
    return observables(pick->state, world).absorbed_power;
}

} // namespace

FeedbackProbeResult feedback_sign_probe(const ScenarioConfig& config,
                                        double intensity, double delta) {
    ScenarioConfig cfg = config;
    auto issues = validate(cfg);
    if (!issues.ok()) throw std::invalid_argument(issues.summary());
    if (cfg.lights.empty())
        throw std::invalid_argument("feedback_sign_probe: scenario has no lights");
    if (intensity <= 0 || delta <= 0)
        throw std::invalid_argument("feedback_sign_probe: intensity and delta must be > 0");

    double P0 = steady_absorbed(cfg, intensity);
    double P1 = steady_absorbed(cfg, intensity + delta);

    FeedbackProbeResult r;
    if (P0 <= 0) {
        r.sign = FeedbackSign::none;
        return r;
    }
    // Fixed geometry would give P1/P0 == (I+delta)/I exactly; deformation that
    // raises the ratio above that is positive feedback, below is negative.
    double linear = (intensity + delta) / intensity;
    r.gain_ratio = (P1 / P0) / linear;
    const double tol = 1e-3;
    if (r.gain_ratio > 1.0 + tol)
        r.sign = FeedbackSign::positive;
    else if (r.gain_ratio < 1.0 - tol)
        r.sign = FeedbackSign::negative;
    else
        r.sign = FeedbackSign::none;
    return r;
}

} // namespace photofeedback
