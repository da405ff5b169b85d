#include <cmath>
#include <stdexcept>

#include "photofeedback/analysis.hpp"

namespace photofeedback {

namespace {

// Ramp a transverse tip force from a stable state until the static branch
// folds (Newton loses the branch or the solution jumps basins). Returns the
// sampled (tip displacement, force) path up to the last pre-fold point.
std::vector<std::pair<double, double>> ramp_to_fold(const World& world,
                                                    const SteadyState& from,
                                                    Vec2 force_dir,
                                                    const BarrierOptions& opts) {
    const double L = world.units.front().geometry.length;
    const double max_step = opts.max_tip_step_fraction * L;

    std::vector<std::pair<double, double>> path;
    double d_prev = observables(from.state, world).d;
    path.emplace_back(d_prev, 0.0);

    SystemState seed = from.state;
    double F = 0.0;
    double dF = opts.force_cap / 200.0;
    const double dF_min = opts.force_cap * 1e-6;

    while (F < opts.force_cap) {
        double trialF = std::min(F + dF, opts.force_cap);
        SteadySolveOptions sopts;
        sopts.tip_force = trialF * force_dir;
        auto s = solve_steady(world, seed, sopts);
        bool fold = !s || s->stability == Stability::unstable;
        double d_new = 0.0;
        if (!fold) {
            d_new = observables(s->state, world).d;
            // A displacement jump many steps wide means the branch folded and
            // Newton landed on the far basin.
            if (std::abs(d_new - d_prev) > 20.0 * max_step) fold = true;
        }
        if (fold) {
            if (dF <= dF_min) break; // fold localized
            dF *= 0.5;
            continue;
        }
        if (std::abs(d_new - d_prev) > max_step && dF > dF_min) {
            dF *= 0.5;
            continue;
        }
        path.emplace_back(d_new, trialF);
        seed = s->state;
        F = trialF;
        d_prev = d_new;
        if (std::abs(d_new - path[path.size() - 2].first) < 0.25 * max_step)
            dF = std::min(dF * 1.5, opts.force_cap / 50.0);
        if (F >= opts.force_cap)
            throw std::runtime_error(
                "compute_barrier: force cap reached before the branch folded");
    }
    return path;
}

double work_along(const std::vector<std::pair<double, double>>& path) {
    double W = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i)
        W += 0.5 * (path[i].second + path[i - 1].second) *
             (path[i].first - path[i - 1].first);
    return std::abs(W);
}

} // namespace

EnergyBarrier compute_barrier(const ScenarioConfig& config, double intensity,
                              const BarrierOptions& opts) {
    ScenarioConfig cfg = config;
    auto issues = validate(cfg);
    if (!issues.ok()) throw std::invalid_argument(issues.summary());
    if (cfg.lights.empty())
        throw std::invalid_argument("compute_barrier: scenario has no lights");

    cfg.lights.front().intensity = intensity;
    World world = make_world(cfg);

    auto seeds = default_seeds(world);
    {
        auto wide = default_seeds(world, 0.5);
        seeds.insert(seeds.end(), wide.begin() + 1, wide.end());
    }
    auto states = find_steady_states(world, seeds);
    std::vector<const SteadyState*> stable;
    for (const auto& s : states)
        if (s.stability == Stability::stable) stable.push_back(&s);
    if (stable.size() < 2)
        throw std::runtime_error(
            "compute_barrier: configuration is not bistable at this intensity");

    // States 1 and 2: extremal transverse tip deflections.
    const SteadyState* s1 = stable.front();
    const SteadyState* s2 = stable.front();
    double d1 = observables(s1->state, world).d, d2 = d1;
    for (const auto* s : stable) {
        double d = observables(s->state, world).d;
        if (d < d1) { d1 = d; s1 = s; }
        if (d > d2) { d2 = d; s2 = s; }
    }

    Vec2 m = perp(world.lights.front().direction);

    EnergyBarrier out;
    out.intensity = intensity;
    out.path_1to2 = ramp_to_fold(world, *s1, m, opts);           // push toward +d
    out.path_2to1 = ramp_to_fold(world, *s2, -1.0 * m, opts);    // push toward -d
    out.barrier_1to2 = work_along(out.path_1to2);
    out.barrier_2to1 = work_along(out.path_2to1);
    return out;
}

} // namespace photofeedback
