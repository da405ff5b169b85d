#include <cmath>
#include <stdexcept>

#include "photofeedback/dynamics.hpp"

namespace photofeedback {

namespace {

double default_observable(const SteadyState& s, const World& w) {
    return observables(s.state, w).delta_alpha;
}

ResponseCurve sweep_once(const ScenarioConfig& config,
                         std::vector<double> values, bool up,
                         const SteadyObservable& obs) {
    ResponseCurve curve;
    curve.direction_up = up;
    if (!up) std::reverse(values.begin(), values.end());

    ScenarioConfig cfg = config;
    if (cfg.lights.empty())
        throw std::invalid_argument("sweep_intensity: scenario has no lights");

    SystemState seed{};
    bool have_seed = false;
    for (double I : values) {
        cfg.lights.front().intensity = I;
        World world = make_world(cfg);
        if (!have_seed) {
            seed = rest_state(world);
            have_seed = true;
        }
        auto s = solve_steady(world, seed);
        if (!s || s->stability == Stability::unstable) {
            // Lost the branch: a fold was passed. Re-seed once from rest plus
            // a nudge toward the previous deflection before giving up.
            SystemState retry = rest_state(world);
            double dir = 0.0;
            if (!curve.observable.empty() && curve.observable.back() != 0.0)
                dir = curve.observable.back() > 0 ? 1.0 : -1.0;
            for (auto& th : retry.theta) th += 0.1 * dir;
            s = solve_steady(world, retry);
            if (!s || s->stability == Stability::unstable) {
                curve.truncated_at_fold = true;
                break;
            }
        }
        seed = s->state;
        curve.parameter.push_back(I);
        curve.observable.push_back(obs(*s, world));
    }
    if (!up) {
        std::reverse(curve.parameter.begin(), curve.parameter.end());
        std::reverse(curve.observable.begin(), curve.observable.end());
    }
    return curve;
}

} // namespace

ResponseCurve sweep_intensity(const ScenarioConfig& config,
                              const std::vector<double>& values,
                              const SweepOptions& opts) {
    ScenarioConfig checked = config;
    auto issues = validate(checked);
    if (!issues.ok()) throw std::invalid_argument(issues.summary());
    SteadyObservable obs = opts.observable ? opts.observable : default_observable;

    ResponseCurve fwd = sweep_once(checked, values, opts.up, obs);
    if (opts.check_hysteresis) {
        ResponseCurve rev = sweep_once(checked, values, !opts.up, obs);
        std::size_t n = std::min(fwd.parameter.size(), rev.parameter.size());
        for (std::size_t i = 0; i < n; ++i) {
            // Compare only matching parameter points; a truncated curve may
            // cover a shorter prefix/suffix.
            for (std::size_t j = 0; j < rev.parameter.size(); ++j) {
                if (rev.parameter[j] == fwd.parameter[i] &&
                    std::abs(rev.observable[j] - fwd.observable[i]) >
                        opts.hysteresis_tol) {
                    fwd.hysteresis = true;
                }
            }
        }
        if (rev.truncated_at_fold) fwd.truncated_at_fold = true;
    }
    return fwd;
}

} // namespace photofeedback
