#include <cmath>
#include <stdexcept>

#include "photofeedback/analysis.hpp"

namespace photofeedback {

namespace {

// True when one trigger pulse of the given intensity flips the bistable unit
// from its negative-d state to the positive-d side, settling there within
// five thermal time constants of the pulse end.
bool trigger_flips(const ScenarioConfig& base, double fuel_intensity,
                   const LightField& trigger_template, double trigger_duration,
                   double trigger_intensity, const SystemState& start,
                   double start_d) {
    ScenarioConfig cfg = base;
    cfg.lights.front().intensity = fuel_intensity;
    LightField trig = trigger_template;
    trig.intensity = trigger_intensity;
    const double t_settle_start = 0.5; // s of fuel-only hold before the pulse
    trig.schedule.intervals = {{t_settle_start, t_settle_start + trigger_duration}};
    cfg.lights.push_back(trig);

    World world = make_world(cfg);
    const auto& m = cfg.material;
    double tau_th = m.heat_capacity / m.heat_loss;

    Trace trace;
    SystemState seed = start;
    seed.time = 0.0;
    trace.times.push_back(0.0);
    trace.states.push_back(seed);
    trace.records.push_back(observables(seed, world));
    IntegratorSettings settings = cfg.integrator;
    double t_end = t_settle_start + trigger_duration + 5.0 * tau_th;
    settings.t_end = t_end;
    integrate_more(trace, world, settings, t_end);

    // Near the pitchfork the basin-deciding mode relaxes much more slowly
    // than tau_th; keep settling in chunks until the tip commits to a side.
    auto decided = [&] {
        double d_end = trace.records.back().d;
        return std::abs(d_end) > 0.25 * std::abs(start_d);
    };
    const double t_max = t_end + 100.0 * tau_th;
    while (!decided() && trace.times.back() < t_max)
        integrate_more(trace, world, settings, 5.0 * tau_th);

    double d_end = trace.records.back().d;
    // Flip means the tip ends on the opposite side of center from where it
    // started, by a definite fraction of the original deflection.
    return d_end * start_d < 0 && std::abs(d_end) > 0.25 * std::abs(start_d);
}

} // namespace

SwitchingResult switching_threshold(const ScenarioConfig& config,
                                    double fuel_intensity,
                                    const LightField& trigger_template,
                                    double trigger_duration,
                                    const SwitchingOptions& opts) {
    ScenarioConfig cfg = config;
    auto issues = validate(cfg);
    if (!issues.ok()) throw std::invalid_argument(issues.summary());
    if (cfg.lights.empty())
        throw std::invalid_argument("switching_threshold: scenario has no lights");

    // Starting state: the stable branch the trigger must overturn.
    cfg.lights.front().intensity = fuel_intensity;
    World world = make_world(cfg);
    auto seeds = default_seeds(world);
    {
        auto wide = default_seeds(world, 0.5);
        seeds.insert(seeds.end(), wide.begin() + 1, wide.end());
    }
    auto states = find_steady_states(world, seeds);
    const SteadyState* start = nullptr;
    double start_d = 0.0;
    for (const auto& s : states) {
        if (s.stability != Stability::stable) continue;
        double d = observables(s.state, world).d;
        if (!start || d < start_d) { start = &s; start_d = d; }
    }
    if (!start || start_d >= 0)
        throw std::runtime_error(
            "switching_threshold: no stable deflected state to switch from");

    SwitchingResult out;
    // Establish a bracket by doubling up from a small intensity; very strong
    // triggers can overdrive the strip past the target basin, so the cap
    // itself is not a trustworthy upper bracket.
    double hi = opts.intensity_cap / 1024.0;
    while (hi <= opts.intensity_cap &&
           !trigger_flips(cfg, fuel_intensity, trigger_template,
                          trigger_duration, hi, start->state, start_d))
        hi *= 2.0;
    if (hi > opts.intensity_cap) {
        out.above_cap = true;
        out.threshold = opts.intensity_cap;
        return out;
    }
    double lo = hi > opts.intensity_cap / 1024.0 ? hi / 2.0 : 0.0;
    for (int i = 0; i < opts.bisection_iters; ++i) {
        double mid = 0.5 * (lo + hi);
        if (trigger_flips(cfg, fuel_intensity, trigger_template,
                          trigger_duration, mid, start->state, start_d))
            hi = mid;
        else
            lo = mid;
        ++out.bisection_iters;
    }
    out.threshold = hi;
    return out;
}

} // namespace photofeedback
