#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "photofeedback/dynamics.hpp"

namespace photofeedback {

namespace {

constexpr double kThermalScale = 100.0; // K per Newton variable unit
constexpr double kMarginalBand = 1e-6;  // 1/s

// World with an extra always-on tip force disturbance (continuation support).
World with_tip_force(const World& world, Vec2 F) {
    if (F.x == 0.0 && F.y == 0.0) return world;
    World w = world;
    Disturbance d;
    d.kind = DisturbanceKind::tip_force;
    double mag = std::sqrt(dot(F, F));
    d.magnitude = mag;
    d.direction = (1.0 / mag) * F;
    w.disturbances.push_back(d);
    return w;
}

struct Residual {
    const World& world;
    double time;
    int n;

    SystemState to_state(const Eigen::VectorXd& x) const {
        SystemState s;
        s.theta.assign(x.data(), x.data() + n);
        s.omega.assign(n, 0.0);
        s.T.resize(n);
        for (int i = 0; i < n; ++i) {
            double T_amb = 0.0;
            // find owning unit's ambient
            int off = 0;
            for (const auto& u : world.units) {
                int m = u.geometry.segment_count;
                if (i < off + m) { T_amb = u.material.ambient_temperature; break; }
                off += m;
            }
            s.T[i] = T_amb + kThermalScale * x[n + i];
        }
        s.time = time;
        return s;
    }

    // Dimensionless residual: net joint torque / k (rad), thermal deviation / 100 (K).
    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
        SystemState s = to_state(x);
        auto d = full_rhs(s, time, world);
        Eigen::VectorXd r(2 * n);
        int off = 0;
        for (const auto& u : world.units) {
            int m = u.geometry.segment_count;
            const double ell = u.geometry.segment_length();
            const double inertia = u.material.linear_density * ell * ell * ell / 3.0;
            const double c = std::max(u.material.joint_damping, 1e-12);
            const double tau_th = u.material.heat_capacity / u.material.heat_loss;
            for (int i = 0; i < m; ++i) {
                double net = world.overdamped ? d.dtheta[off + i] * c
                                              : d.domega[off + i] * inertia;
                r[off + i] = net / u.material.joint_stiffness;
                r[n + off + i] = d.dT[off + i] * tau_th / kThermalScale;
            }
            off += m;
        }
        return r;
    }
};

} // namespace

std::vector<SystemState> default_seeds(const World& world, double tilt) {
    std::vector<SystemState> seeds;
    seeds.push_back(rest_state(world));
    for (double s : {tilt, -tilt}) {
        SystemState st = seeds.front();
        for (auto& th : st.theta) th += s;
        seeds.push_back(st);
    }
    return seeds;
}

SystemState chain_seed(const World& world, const std::vector<int>& signs,
                       double tilt) {
    SystemState st = rest_state(world);
    for (std::size_t u = 0; u < world.units.size(); ++u) {
        int off = world.segment_offset((int)u);
        int n = world.units[u].geometry.segment_count;
        double s = u < signs.size() ? (double)signs[u] : 0.0;
        for (int i = 0; i < n; ++i) st.theta[off + i] += s * tilt;
    }
    return st;
}

std::optional<SteadyState> solve_steady(const World& base_world,
                                        const SystemState& seed,
                                        const SteadySolveOptions& opts) {
    World world = with_tip_force(base_world, opts.tip_force);
    const int n = world.total_segments();
    Residual res{world, opts.time_freeze, n};

    Eigen::VectorXd x(2 * n);
    for (int i = 0; i < n; ++i) x[i] = seed.theta[i];
    {
        SystemState probe = res.to_state(Eigen::VectorXd::Zero(2 * n));
        for (int i = 0; i < n; ++i)
            x[n + i] = (seed.T[i] - probe.T[i]) / kThermalScale;
    }

    Eigen::VectorXd r = res(x);
    double rnorm = r.lpNorm<Eigen::Infinity>();
    for (int iter = 0; iter < opts.max_newton_iters && rnorm > opts.residual_tol;
         ++iter) {
        // Forward-difference Jacobian.
        Eigen::MatrixXd J(2 * n, 2 * n);
        const double h = 1e-7;
        for (int j = 0; j < 2 * n; ++j) {
            Eigen::VectorXd xp = x;
            xp[j] += h;
            J.col(j) = (res(xp) - r) / h;
        }
        Eigen::VectorXd step = J.fullPivLu().solve(-r);
        if (!step.allFinite()) return std::nullopt;

        // Backtracking line search on the residual norm.
        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            Eigen::VectorXd xn = x + lambda * step;
            Eigen::VectorXd rn = res(xn);
            double rn_norm = rn.lpNorm<Eigen::Infinity>();
            if (rn_norm < rnorm || rn_norm <= opts.residual_tol) {
                x = xn;
                r = rn;
                rnorm = rn_norm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) break;
    }
    if (rnorm > opts.residual_tol) return std::nullopt;

    SteadyState out;
    out.state = res.to_state(x);
    out.residual = rnorm;

    if (opts.classify) {
        // Eigenvalues of the linearization: (theta, omega, T) for inertial
        // systems, (theta, T) when overdamped (the omega block is inert).
        const bool od = world.overdamped;
        const int dim = od ? 2 * n : 3 * n;
        auto rhs3 = [&](const Eigen::VectorXd& y) {
            SystemState s = out.state;
            for (int i = 0; i < n; ++i) {
                s.theta[i] = y[i];
                if (!od) s.omega[i] = y[n + i];
                s.T[i] = y[(od ? 1 : 2) * n + i];
            }
            auto d = full_rhs(s, opts.time_freeze, world);
            Eigen::VectorXd dy(dim);
            for (int i = 0; i < n; ++i) {
                dy[i] = d.dtheta[i];
                if (!od) dy[n + i] = d.domega[i];
                dy[(od ? 1 : 2) * n + i] = d.dT[i];
            }
            return dy;
        };
        Eigen::VectorXd y0(dim);
        for (int i = 0; i < n; ++i) {
            y0[i] = out.state.theta[i];
            if (!od) y0[n + i] = 0.0;
            y0[(od ? 1 : 2) * n + i] = out.state.T[i];
        }
        Eigen::VectorXd f0 = rhs3(y0);
        Eigen::MatrixXd A(dim, dim);
        const double h = 1e-6;
        for (int j = 0; j < dim; ++j) {
            Eigen::VectorXd yp = y0;
            yp[j] += h;
            A.col(j) = (rhs3(yp) - f0) / h;
        }
        Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
        double lead = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim; ++i)
            lead = std::max(lead, es.eigenvalues()[i].real());
        out.leading_eigenvalue = lead;
        if (lead > kMarginalBand)
            out.stability = Stability::unstable;
        else if (lead < -kMarginalBand)
            out.stability = Stability::stable;
        else
            out.stability = Stability::marginal;
    }

    // Basin tag from the transverse tip deflection sign.
    auto rec = observables(out.state, world);
    if (rec.d > 1e-7)
        out.basin_tag = "plus";
    else if (rec.d < -1e-7)
        out.basin_tag = "minus";
    else
        out.basin_tag = "center";
    return out;
}

std::vector<SteadyState> find_steady_states(const World& world,
                                            const std::vector<SystemState>& seeds,
                                            const SteadySolveOptions& opts) {
    std::vector<SteadyState> found;
    for (const auto& seed : seeds) {
        auto s = solve_steady(world, seed, opts);
        if (!s) {
            // Newton can stall far from a root; relax the seed toward the
            // attractor first and retry.
            double tau = 0.0;
            for (const auto& u : world.units)
                tau = std::max(tau, u.material.heat_capacity /
                                        u.material.heat_loss);
            World relaxed = with_tip_force(world, opts.tip_force);
            Trace tr;
            SystemState st = seed;
            st.time = opts.time_freeze;
            tr.times.push_back(st.time);
            tr.states.push_back(st);
            tr.records.push_back(observables(st, relaxed));
            integrate_more(tr, relaxed, relaxed.integrator, 20.0 * tau);
            s = solve_steady(world, tr.states.back(), opts);
        }
        if (!s) continue;
        bool dup = false;
        for (const auto& prev : found) {
            double dist = 0.0;
            for (std::size_t i = 0; i < s->state.theta.size(); ++i) {
                dist = std::max(dist, std::abs(s->state.theta[i] -
                                               prev.state.theta[i]));
                dist = std::max(dist, std::abs(s->state.T[i] - prev.state.T[i]) /
                                          kThermalScale);
            }
            if (dist < opts.dedup_distance) {
                dup = true;
                break;
            }
        }
        if (!dup) found.push_back(std::move(*s));
    }
    return found;
}

std::vector<SteadyState> find_steady_states(const ScenarioConfig& config,
                                            const std::vector<SystemState>& seeds) {
    ScenarioConfig checked = config;
    auto issues = validate(checked);
    if (!issues.ok()) throw std::invalid_argument(issues.summary());
    World world = make_world(checked);
    if (seeds.empty()) return find_steady_states(world, default_seeds(world));
    return find_steady_states(world, seeds);
}

Trace run_chain(const ChainConfig& chain, const std::vector<int>& initial_signs,
                const IntegratorSettings& settings) {
    ChainConfig checked = chain;
    auto issues = validate(checked);
    if (!issues.ok()) throw std::invalid_argument(issues.summary());
    World world = make_world(checked);
    world.integrator = settings;
    Trace trace;
    SystemState seed = chain_seed(world, initial_signs);
    trace.times.push_back(0.0);
    trace.states.push_back(seed);
    trace.records.push_back(observables(seed, world));
    integrate_more(trace, world, settings, settings.t_end);
    return trace;
}

} // namespace photofeedback
