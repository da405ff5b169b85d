#include <cmath>
#include <stdexcept>

#include "photofeedback/analysis.hpp"

namespace photofeedback {

StableConfigurationSet enumerate_states(const ChainConfig& chain, double intensity,
                                        const EnumerateOptions& opts) {
    ChainConfig cc = chain;
    auto issues = validate(cc);
    if (!issues.ok()) throw std::invalid_argument(issues.summary());

    if (cc.shared_lights.empty())
        throw std::invalid_argument("enumerate_states: chain has no shared lights");
    cc.shared_lights.front().intensity = intensity;

    World world = make_world(cc);
    const auto& m = cc.unit.material;
    const double tau_th = m.heat_capacity / m.heat_loss;
    const double L = cc.unit.geometry.length;
    const double d_min = opts.sign_threshold_fraction * L;
    const int N = cc.unit_count;

    StableConfigurationSet out;
    out.unit_count = N;

    // All sign vectors, both as seeds and as the universe for `forbidden`.
    std::vector<std::vector<int>> all;
    for (int mask = 0; mask < (1 << N); ++mask) {
        std::vector<int> signs(N);
        for (int u = 0; u < N; ++u) signs[u] = (mask >> u) & 1 ? 1 : -1;
        all.push_back(std::move(signs));
    }

    IntegratorSettings settings = cc.unit.integrator;
    const double chunk = 5.0 * tau_th;
    const double t_max = opts.max_time_factor * tau_th;

    for (const auto& seed_signs : all) {
        SystemState state = chain_seed(world, seed_signs, opts.tilt);
        Trace trace;
        trace.times.push_back(0.0);
        trace.states.push_back(state);
        trace.records.push_back(observables(state, world));

        auto signs_now = [&] {
            const auto& rec = trace.records.back();
            std::vector<int> s(N, 0);
            for (int u = 0; u < N; ++u) {
                double d = rec.unit_d[u];
                if (d > d_min)
                    s[u] = 1;
                else if (d < -d_min)
                    s[u] = -1;
            }
            return s;
        };

        // Near the pitchfork the velocity decays very slowly, so "settled"
        // means the basin signs are definite and stop changing for a long
        // stretch of consecutive checkpoints (or the rates die out early).
        bool settled = false;
        std::vector<int> settled_signs;
        int stable_count = 0;
        int frozen_count = 0;
        std::vector<int> last_signs;
        double last_vmax = 1e300;
        while (trace.times.back() < t_max) {
            double dt = std::min(chunk, t_max - trace.times.back());
            integrate_more(trace, world, settings, dt);
            auto s = signs_now();
            bool definite = true;
            for (int v : s)
                if (v == 0) definite = false;
            if (definite && s == last_signs)
                ++stable_count;
            else
                stable_count = 0;

            auto rhs = full_rhs(trace.states.back(), trace.times.back(), world);
            double vmax = 0.0;
            for (double w : rhs.dtheta) vmax = std::max(vmax, std::abs(w));
            // A trajectory whose sign vector is frozen (zeros allowed) while
            // the rates decay monotonically is converging to a fixed point,
            // possibly one with a unit parked near center.
            if (s == last_signs && vmax < last_vmax)
                ++frozen_count;
            else
                frozen_count = 0;
            last_signs = s;
            last_vmax = vmax;

            if ((definite && stable_count >= 8) || vmax < opts.settle_velocity ||
                frozen_count >= 8) {
                settled = true;
                settled_signs = s;
                break;
            }
        }

        if (!settled) {
            out.unresolved.push_back(seed_signs);
            continue;
        }
        bool definite = true;
        for (int v : settled_signs)
            if (v == 0) definite = false;
        if (!definite) {
            out.centered.push_back(seed_signs);
            continue;
        }
        bool known = false;
        for (const auto& s : out.observed)
            if (s == settled_signs) { known = true; break; }
        if (!known) {
            out.observed.push_back(settled_signs);
            out.representative[settled_signs] = trace.states.back();
        }
    }

    for (const auto& signs : all) {
        bool seen = false;
        for (const auto& s : out.observed)
            if (s == signs) { seen = true; break; }
        if (!seen) out.forbidden.push_back(signs);
    }
    return out;
}

} // namespace photofeedback
