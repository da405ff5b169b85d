#include "photofeedback/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace photofeedback {

namespace {

// Flat vector view of the full state for generic stepping.
std::vector<double> pack(const SystemState& s) {
    std::vector<double> y;
    y.reserve(3 * s.theta.size() + 2);
    y.insert(y.end(), s.theta.begin(), s.theta.end());
    y.insert(y.end(), s.omega.begin(), s.omega.end());
    y.insert(y.end(), s.T.begin(), s.T.end());
    if (s.body_x) {
        y.push_back(*s.body_x);
        y.push_back(*s.body_v);
    }
    return y;
}

void unpack(const std::vector<double>& y, SystemState& s) {
    std::size_t n = s.theta.size();
    std::copy(y.begin(), y.begin() + n, s.theta.begin());
    std::copy(y.begin() + n, y.begin() + 2 * n, s.omega.begin());
    std::copy(y.begin() + 2 * n, y.begin() + 3 * n, s.T.begin());
    if (s.body_x) {
        s.body_x = y[3 * n];
        s.body_v = y[3 * n + 1];
    }
}

std::vector<double> rhs_flat(const std::vector<double>& y, double t,
                             SystemState& scratch, const World& world) {
    unpack(y, scratch);
    scratch.time = t;
    auto d = full_rhs(scratch, t, world);
    std::vector<double> dy;
    dy.reserve(y.size());
    dy.insert(dy.end(), d.dtheta.begin(), d.dtheta.end());
    dy.insert(dy.end(), d.domega.begin(), d.domega.end());
    dy.insert(dy.end(), d.dT.begin(), d.dT.end());
    if (scratch.body_x) {
        dy.push_back(d.dbody_x);
        dy.push_back(d.dbody_v);
    }
    return dy;
}

void axpy(std::vector<double>& out, const std::vector<double>& y, double a,
          const std::vector<double>& d) {
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + a * d[i];
}

// One classical RK4 step.
void rk4_step(std::vector<double>& y, double t, double h, SystemState& scratch,
              const World& world) {
    auto k1 = rhs_flat(y, t, scratch, world);
    std::vector<double> tmp(y.size());
    axpy(tmp, y, h / 2, k1);
    auto k2 = rhs_flat(tmp, t + h / 2, scratch, world);
    axpy(tmp, y, h / 2, k2);
    auto k3 = rhs_flat(tmp, t + h / 2, scratch, world);
    axpy(tmp, y, h, k3);
    auto k4 = rhs_flat(tmp, t + h, scratch, world);
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
}

// Dormand-Prince 5(4) coefficients.
struct Dopri {
    static constexpr double c[7] = {0, 1. / 5, 3. / 10, 4. / 5, 8. / 9, 1, 1};
    static constexpr double a[7][6] = {
        {},
        {1. / 5},
        {3. / 40, 9. / 40},
        {44. / 45, -56. / 15, 32. / 9},
        {19372. / 6561, -25360. / 2187, 64448. / 6561, -212. / 729},
        {9017. / 3168, -355. / 33, 46732. / 5247, 49. / 176, -5103. / 18656},
        {35. / 384, 0, 500. / 1113, 125. / 192, -2187. / 6784, 11. / 84}};
    static constexpr double b5[7] = {35. / 384,      0, 500. / 1113, 125. / 192,
                                     -2187. / 6784, 11. / 84, 0};
    static constexpr double b4[7] = {5179. / 57600,    0,           7571. / 16695,
                                     393. / 640,       -92097. / 339200,
                                     187. / 2100,      1. / 40};
};

// Collect schedule edge times in (t0, t1] so fixed steps land on them exactly
// and the adaptive stepper never straddles a discontinuity.
std::vector<double> schedule_edges(const World& world, double t0, double t1) {
    std::vector<double> edges;
    auto add = [&](const Schedule& s) {
        for (const auto& iv : s.intervals) {
            if (iv.first > t0 && iv.first < t1) edges.push_back(iv.first);
            if (iv.second > t0 && iv.second < t1) edges.push_back(iv.second);
        }
    };
    for (const auto& l : world.lights) add(l.schedule);
    for (const auto& d : world.disturbances) add(d.schedule);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges.push_back(t1);
    return edges;
}

} // namespace

namespace {

Trace integrate_from(SystemState& state, const World& world,
                     const IntegratorSettings& settings, double t_end) {
    Trace trace;
    const double t0 = state.time;
    if (t_end <= t0) {
        trace.times.push_back(t0);
        trace.states.push_back(state);
        trace.records.push_back(observables(state, world));
        return trace;
    }

    auto y = pack(state);
    SystemState scratch = state;

    auto sample = [&](double t) {
        unpack(y, state);
        state.time = t;
        trace.times.push_back(t);
        trace.states.push_back(state);
        trace.records.push_back(observables(state, world));
    };

    sample(t0);
    auto edges = schedule_edges(world, t0, t_end);

    if (settings.method == IntegrationMethod::rk4_fixed) {
        const double dt = settings.dt;
        long step_count = 0;
        double t = t0;
        for (double edge : edges) {
            long n = std::max(1L, (long)std::ceil((edge - t) / dt - 1e-12));
            double h = (edge - t) / n;
            for (long i = 0; i < n; ++i) {
                rk4_step(y, t, h, scratch, world);
                t += h;
                ++step_count;
                if (step_count % settings.sample_stride == 0) sample(t);
            }
            t = edge; // kill roundoff drift at segment boundaries
        }
        if (t_end - trace.times.back() > 0.5 * settings.dt) sample(t_end);
    } else {
        // Embedded Dormand-Prince with PI-free step control.
        double h = settings.dt > 0 ? settings.dt : 1e-4;
        double t = t0;
        const double atol = settings.abs_tol, rtol = settings.rel_tol;
        double next_sample = t0 + settings.dt * settings.sample_stride;
        std::vector<std::vector<double>> k(7);
        std::vector<double> tmp(y.size()), y5(y.size()), y4(y.size());
        for (double edge : edges) {
            while (t < edge - 1e-15) {
                h = std::min(h, edge - t);
                k[0] = rhs_flat(y, t, scratch, world);
                for (int s = 1; s < 7; ++s) {
                    tmp = y;
                    for (int j = 0; j < s; ++j)
                        for (std::size_t i = 0; i < y.size(); ++i)
                            tmp[i] += h * Dopri::a[s][j] * k[j][i];
                    k[s] = rhs_flat(tmp, t + Dopri::c[s] * h, scratch, world);
                }
                double err = 0.0;
                for (std::size_t i = 0; i < y.size(); ++i) {
                    double v5 = y[i], v4 = y[i];
                    for (int s = 0; s < 7; ++s) {
                        v5 += h * Dopri::b5[s] * k[s][i];
                        v4 += h * Dopri::b4[s] * k[s][i];
                    }
                    y5[i] = v5;
                    y4[i] = v4;
                    double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(v5));
                    double e = (v5 - v4) / sc;
                    err += e * e;
                }
                err = std::sqrt(err / y.size());
                if (err <= 1.0) {
                    t += h;
                    y = y5;
                    if (t >= next_sample - 1e-12) {
                        sample(t);
                        next_sample = t + settings.dt * settings.sample_stride;
                    }
                }
                double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
                h *= std::clamp(fac, 0.2, 5.0);
                if (h < 1e-12)
                    throw std::runtime_error("adaptive step underflow");
            }
            t = edge;
        }
        if (t_end - trace.times.back() > 0.5 * settings.dt) sample(t_end);
    }
    return trace;
}

} // namespace

Trace integrate(const World& world, const IntegratorSettings& settings) {
    SystemState state = rest_state(world);
    return integrate_from(state, world, settings, settings.t_end);
}

void integrate_more(Trace& trace, const World& world,
                    const IntegratorSettings& settings, double t_extra) {
    if (trace.states.empty()) {
        trace = integrate(world, settings);
        return;
    }
    SystemState state = trace.states.back();
    auto more = integrate_from(state, world, settings, state.time + t_extra);
    // First sample duplicates the current endpoint; skip it.
    for (std::size_t i = 1; i < more.times.size(); ++i) {
        trace.times.push_back(more.times[i]);
        trace.states.push_back(more.states[i]);
        trace.records.push_back(more.records[i]);
    }
}

Trace integrate(const ScenarioConfig& config) {
    ScenarioConfig cfg = config;
    auto issues = validate(cfg);
    if (!issues.ok()) throw std::invalid_argument(issues.summary());
    return integrate(make_world(cfg), cfg.integrator);
}

} // namespace photofeedback
