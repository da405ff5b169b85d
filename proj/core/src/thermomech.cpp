#include "photofeedback/thermomech.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "photofeedback/kinematics.hpp"

namespace photofeedback {

namespace {

constexpr double kAirDensity = 1.2;   // kg/m^3
constexpr double kFrictionVEps = 1e-4; // m/s, Coulomb regularization

// splitmix64; the gust stream is a pure function of (seed, counter).
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t bits) {
    return (double)(bits >> 11) * 0x1.0p-53;
}

// Per-unit view of a concatenated chain state.
struct UnitView {
    const double* theta;
    const double* omega;
    const double* T;
    int n;
};

UnitView unit_view(const SystemState& s, const World& w, int u) {
    int off = w.segment_offset(u);
    int n = w.units[u].geometry.segment_count;
    return {s.theta.data() + off, s.omega.data() + off, s.T.data() + off, n};
}

} // namespace

int World::total_segments() const {
    int n = 0;
    for (const auto& u : units) n += u.geometry.segment_count;
    return n;
}

int World::segment_offset(int unit) const {
    int n = 0;
    for (int i = 0; i < unit; ++i) n += units[i].geometry.segment_count;
    return n;
}

World make_world(const ScenarioConfig& config) {
    World w;
    w.units.push_back(config);
    w.lights = config.lights;
    w.disturbances = config.disturbances;
    w.body = config.body;
    w.integrator = config.integrator;
    w.shadow_smoothing = config.shadow_smoothing > 0
                             ? config.shadow_smoothing
                             : config.geometry.length / 200.0;
    w.seed = config.seed;
    w.delta_t_mode = config.delta_t_mode;
    w.overdamped = config.overdamped;
    return w;
}

World make_world(const ChainConfig& chain) {
    World w;
    Vec2 m{1.0, 0.0}; // units ordered along the transverse axis of the beam
    if (!chain.shared_lights.empty())
        m = perp(chain.shared_lights.front().direction) * -1.0;
    Vec2 beam{0.0, -1.0};
    if (!chain.shared_lights.empty()) beam = chain.shared_lights.front().direction;
    double offset = 0.0;
    for (int u = 0; u < chain.unit_count; ++u) {
        ScenarioConfig cfg = chain.unit;
        cfg.geometry.base_position = chain.unit.geometry.base_position +
                                     offset * m + (u * chain.stagger) * beam;
        cfg.lights.clear();
        cfg.disturbances.clear();
        w.units.push_back(cfg);
        if (u < chain.unit_count - 1)
            offset += chain.spacings.empty() ? chain.spacing : chain.spacings[u];
    }
    w.lights = chain.shared_lights;
    w.integrator = chain.unit.integrator;
    w.shadow_smoothing = chain.unit.shadow_smoothing > 0
                             ? chain.unit.shadow_smoothing
                             : chain.unit.geometry.length / 200.0;
    w.seed = chain.unit.seed;
    w.delta_t_mode = chain.unit.delta_t_mode;
    w.overdamped = chain.unit.overdamped;
    return w;
}

SystemState rest_state(const World& world) {
    SystemState s;
    for (const auto& cfg : world.units) {
        auto r = rest_state(cfg);
        s.theta.insert(s.theta.end(), r.theta.begin(), r.theta.end());
        s.omega.insert(s.omega.end(), r.omega.begin(), r.omega.end());
        s.T.insert(s.T.end(), r.T.begin(), r.T.end());
    }
    if (world.has_body()) {
        s.body_x = 0.0;
        s.body_v = 0.0;
    }
    return s;
}

double gust_noise(std::uint64_t seed, double t) {
    // Piecewise-constant over 50 ms; Box-Muller on two counter draws.
    std::uint64_t counter = (std::uint64_t)std::floor(t / 0.05) + 1;
    std::uint64_t h1 = mix64(seed * 0x9e3779b97f4a7c15ULL + counter);
    std::uint64_t h2 = mix64(h1 + 0xda942042e4dd58b5ULL);
    double u1 = uniform01(h1), u2 = uniform01(h2);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::vector<double> thermal_rhs(std::span<const double> T,
                                std::span<const double> drive,
                                const MaterialParams& material) {
    std::vector<double> dT(T.size());
    for (std::size_t i = 0; i < T.size(); ++i)
        dT[i] = (drive[i] - material.heat_loss * (T[i] - material.ambient_temperature)) /
                material.heat_capacity;
    return dT;
}

std::vector<double> equilibrium_curvature(std::span<const double> T,
                                          const MaterialParams& material,
                                          const ActuatorGeometry& geometry) {
    std::vector<double> kappa(T.size());
    for (std::size_t i = 0; i < T.size(); ++i) {
        double kappa0 = geometry.rest_curvature.empty() ? 0.0
                                                        : geometry.rest_curvature[i];
        kappa[i] = kappa0 + material.curvature_coeff *
                                (T[i] - material.ambient_temperature);
    }
    return kappa;
}

namespace {

// Adds the generalized torque of a point force applied at `point` rigidly
// attached to segment `seg` of unit `u`. Rotating joint i < seg sweeps the
// whole distal chain; each theta_i gets cross(segment or lever, F).
void add_point_force(std::vector<double>& torque, const World& world,
                     const SystemState& state, int u, int seg, Vec2 point, Vec2 F) {
    const auto& geom = world.units[u].geometry;
    int off = world.segment_offset(u);
    const double ell = geom.segment_length();
    Vec2 base_shift{};
    if (world.body.kind == BodyKind::crawler && state.body_x)
        base_shift = Vec2{*state.body_x, 0.0};
    Vec2 p = geom.base_position + base_shift;
    for (int i = 0; i <= seg; ++i) {
        Vec2 t = unit_from_angle(state.theta[off + i]);
        if (i < seg) {
            torque[off + i] += cross(ell * t, F);
            p += ell * t;
        } else {
            torque[off + i] += cross(point - p, F);
        }
    }
}

} // namespace

std::vector<double> external_torques(const SystemState& state, double t,
                                     const World& world) {
    std::vector<double> torque(world.total_segments(), 0.0);
    Vec2 base_shift{};
    if (world.body.kind == BodyKind::crawler && state.body_x)
        base_shift = Vec2{*state.body_x, 0.0};

    for (const auto& dist : world.disturbances) {
        if (!dist.schedule.active(t)) continue;
        if (dist.kind == DisturbanceKind::wind) {
            double v = dist.magnitude;
            if (dist.noise_fraction > 0)
                v *= 1.0 + dist.noise_fraction * gust_noise(dist.noise_seed, t);
            if (v <= 0) continue;
            for (std::size_t u = 0; u < world.units.size(); ++u) {
                const auto& cfg = world.units[u];
                auto view = unit_view(state, world, u);
                std::span<const double> th{view.theta, (std::size_t)view.n};
                for (const auto& baf : cfg.baffles) {
                    auto f = baffle_frame(baf, cfg.geometry, th, base_shift);
                    Vec2 normal = perp(f.tangent);
                    double a_proj = baf.length * baf.width *
                                    std::abs(dot(normal, dist.direction));
                    double mag = 0.5 * kAirDensity * baf.drag_coefficient * a_proj * v * v;
                    add_point_force(torque, world, state, (int)u, f.attach_segment,
                                    f.centroid, mag * dist.direction);
                }
            }
        } else { // tip_force
            for (std::size_t u = 0; u < world.units.size(); ++u) {
                const auto& cfg = world.units[u];
                auto view = unit_view(state, world, u);
                std::span<const double> th{view.theta, (std::size_t)view.n};
                auto pos = joint_positions(cfg.geometry, th, base_shift);
                add_point_force(torque, world, state, (int)u,
                                cfg.geometry.segment_count - 1, pos.back(),
                                dist.magnitude * dist.direction);
            }
        }
    }
    return torque;
}

std::vector<double> mechanical_rhs(const SystemState& state,
                                   std::span<const double> kappa_eq,
                                   std::span<const double> ext_torque,
                                   const World& world) {
    std::vector<double> domega(world.total_segments(), 0.0);
    for (std::size_t u = 0; u < world.units.size(); ++u) {
        const auto& cfg = world.units[u];
        const auto& m = cfg.material;
        int off = world.segment_offset((int)u);
        int n = cfg.geometry.segment_count;
        const double ell = cfg.geometry.segment_length();
        const double inertia = m.linear_density * ell * ell * ell / 3.0;

        // Joint torques M_0..M_{n-1}; M_n = 0 (free tip).
        std::vector<double> M(n + 1, 0.0);
        for (int j = 0; j < n; ++j) {
            double prev_theta = j == 0 ? cfg.geometry.base_angle : state.theta[off + j - 1];
            double prev_omega = j == 0 ? 0.0 : state.omega[off + j - 1];
            double rel = state.theta[off + j] - prev_theta;
            M[j] = -m.joint_stiffness * (rel - kappa_eq[off + j] * ell) -
                   m.joint_damping * (state.omega[off + j] - prev_omega);
        }
        for (int i = 0; i < n; ++i)
            domega[off + i] = (M[i] - M[i + 1] + ext_torque[off + i]) / inertia;
    }
    return domega;
}

BodyDerivative body_rhs(const SystemState& state,
                        std::span<const double> joint_torque0,
                        const World& world, double t) {
    (void)t;
    BodyDerivative d;
    if (!world.has_body() || !state.body_v) return d;
    const auto& b = world.body;
    double v = *state.body_v;
    d.dx = v;
    if (b.kind == BodyKind::crawler) {
        // Horizontal reaction from the base joint torque through the wheels.
        double f_react = joint_torque0.empty() ? 0.0
                                               : joint_torque0[0] / b.wheel_radius;
        double s = std::tanh(v / kFrictionVEps);
        double mu = 0.5 * (b.friction_forward + b.friction_backward) +
                    0.5 * (b.friction_forward - b.friction_backward) * s;
        double f_fric = mu * b.normal_load * s;
        d.dv = (f_react - f_fric) / b.body_mass;
    } else if (b.kind == BodyKind::swimmer) {
        // Thrust from tip flapping, directed away from the light source.
        const auto& cfg = world.units.front();
        int off = world.segment_offset(0);
        int n = cfg.geometry.segment_count;
        double omega_tip = state.omega[off + n - 1];
        double flap_len = cfg.baffles.empty() ? cfg.geometry.segment_length()
                                              : cfg.baffles.front().length;
        double away = 0.0;
        if (!world.lights.empty()) {
            away = world.lights.front().direction.x;
            if (away != 0.0) away = away > 0 ? 1.0 : -1.0;
        }
        double thrust = b.thrust_coeff * (flap_len * omega_tip) * (flap_len * omega_tip);
        d.dv = (thrust * away - b.linear_drag * v) / b.body_mass;
    }
    return d;
}

Derivatives full_rhs(const SystemState& state, double t, const World& world,
                     RhsDiagnostics* diag) {
    const int total = world.total_segments();
    Derivatives d;
    d.dtheta.assign(total, 0.0);
    d.domega.assign(total, 0.0);
    d.dT.assign(total, 0.0);

    Vec2 base_shift{};
    if (world.body.kind == BodyKind::crawler && state.body_x)
        base_shift = Vec2{*state.body_x, 0.0};

    // Optics: signed absorbed drive per segment, summed over lights.
    std::vector<double> drive(total, 0.0);
    std::vector<double> fraction(total, 0.0);
    double absorbed_total = 0.0;
    std::vector<SystemState> unit_states;
    unit_states.reserve(world.units.size());
    for (std::size_t u = 0; u < world.units.size(); ++u) {
        auto view = unit_view(state, world, u);
        SystemState us;
        us.theta.assign(view.theta, view.theta + view.n);
        unit_states.push_back(std::move(us));
    }
    for (const auto& light : world.lights) {
        if (!light.schedule.active(t) || light.intensity <= 0) continue;
        auto scene = build_scene(light, world.units, unit_states, base_shift);
        auto ill = cast_shadows(scene, world.shadow_smoothing);
        for (std::size_t e = 0; e < scene.elements.size(); ++e) {
            const auto& el = scene.elements[e];
            if (el.is_baffle) continue;
            int idx = world.segment_offset(el.unit) + el.index;
            double sgn = ill.signed_incidence[e] >= 0 ? 1.0 : -1.0;
            drive[idx] += sgn * ill.absorbed[e];
            fraction[idx] += ill.fraction[e];
            absorbed_total += ill.absorbed[e];
        }
    }

    std::vector<double> kappa_eq(total, 0.0);
    for (std::size_t u = 0; u < world.units.size(); ++u) {
        const auto& cfg = world.units[u];
        int off = world.segment_offset((int)u);
        int n = cfg.geometry.segment_count;
        auto dT = thermal_rhs({state.T.data() + off, (std::size_t)n},
                              {drive.data() + off, (std::size_t)n}, cfg.material);
        std::copy(dT.begin(), dT.end(), d.dT.begin() + off);
        auto keq = equilibrium_curvature({state.T.data() + off, (std::size_t)n},
                                         cfg.material, cfg.geometry);
        std::copy(keq.begin(), keq.end(), kappa_eq.begin() + off);
    }

    auto ext = external_torques(state, t, world);
    auto accel = mechanical_rhs(state, kappa_eq, ext, world);
    if (world.overdamped) {
        // First-order mechanics: c * dtheta/dt = net joint torque.
        for (std::size_t u = 0; u < world.units.size(); ++u) {
            const auto& cfg = world.units[u];
            int off = world.segment_offset((int)u);
            const double ell = cfg.geometry.segment_length();
            const double inertia = cfg.material.linear_density * ell * ell * ell / 3.0;
            double c = std::max(cfg.material.joint_damping, 1e-12);
            for (int i = 0; i < cfg.geometry.segment_count; ++i)
                d.dtheta[off + i] = accel[off + i] * inertia / c;
        }
    } else {
        d.domega = std::move(accel);
        for (int i = 0; i < total; ++i) d.dtheta[i] = state.omega[i];
    }

    if (world.has_body() && state.body_v) {
        // Base joint torque of unit 0 for the crawler reaction.
        const auto& cfg = world.units.front();
        const auto& m = cfg.material;
        const double ell = cfg.geometry.segment_length();
        double rel = state.theta[0] - cfg.geometry.base_angle;
        double M0 = -m.joint_stiffness * (rel - kappa_eq[0] * ell) -
                    m.joint_damping * state.omega[0];
        std::vector<double> base_torque{M0};
        auto bd = body_rhs(state, base_torque, world, t);
        d.dbody_x = bd.dx;
        d.dbody_v = bd.dv;
    }

    for (double v : d.domega)
        if (!std::isfinite(v)) throw std::runtime_error("non-finite derivative (omega)");
    for (std::size_t i = 0; i < d.dT.size(); ++i)
        if (!std::isfinite(d.dT[i]))
            throw std::runtime_error("non-finite derivative at segment " +
                                     std::to_string(i));

    if (diag) {
        diag->absorbed_power = absorbed_total;
        diag->illuminated_fraction = std::move(fraction);
        diag->signed_drive = std::move(drive);
    }
    return d;
}

double energy_functional(const SystemState& state, const World& world,
                         double thermal_scale) {
    double E = 0.0;
    for (std::size_t u = 0; u < world.units.size(); ++u) {
        const auto& cfg = world.units[u];
        const auto& m = cfg.material;
        int off = world.segment_offset((int)u);
        int n = cfg.geometry.segment_count;
        const double ell = cfg.geometry.segment_length();
        const double inertia = m.linear_density * ell * ell * ell / 3.0;
        auto keq = equilibrium_curvature({state.T.data() + off, (std::size_t)n},
                                         cfg.material, cfg.geometry);
        for (int j = 0; j < n; ++j) {
            double prev = j == 0 ? cfg.geometry.base_angle : state.theta[off + j - 1];
            double rel = state.theta[off + j] - prev;
            double dev = rel - keq[j] * ell;
            E += 0.5 * m.joint_stiffness * dev * dev;
            E += 0.5 * inertia * state.omega[off + j] * state.omega[off + j];
            double s = state.T[off + j] - m.ambient_temperature;
            E += 0.5 * m.heat_capacity * s * s / thermal_scale;
        }
    }
    return E;
}

ObservablesRecord observables(const SystemState& state, const World& world) {
    ObservablesRecord o;
    RhsDiagnostics diag;
    full_rhs(state, state.time, world, &diag);
    o.absorbed_power = diag.absorbed_power;
    o.illuminated_fraction = diag.illuminated_fraction;

    Vec2 beam_dir{0.0, -1.0};
    if (!world.lights.empty()) beam_dir = world.lights.front().direction;
    Vec2 m = perp(beam_dir);

    Vec2 base_shift{};
    if (world.body.kind == BodyKind::crawler && state.body_x)
        base_shift = Vec2{*state.body_x, 0.0};

    o.unit_d.resize(world.units.size());
    for (std::size_t u = 0; u < world.units.size(); ++u) {
        const auto& cfg = world.units[u];
        int off = world.segment_offset((int)u);
        int n = cfg.geometry.segment_count;
        auto rest = rest_state(cfg);
        auto pos = joint_positions(cfg.geometry,
                                   {state.theta.data() + off, (std::size_t)n});
        auto pos0 = joint_positions(cfg.geometry, rest.theta);
        double d_u = dot(pos.back(), m) - dot(pos0.back(), m);
        o.unit_d[u] = d_u;
        if (u == 0) {
            o.d = d_u;
            o.delta_alpha = state.theta[off + n - 1] - rest.theta[n - 1];
            const double ell = cfg.geometry.segment_length();
            double sum = 0.0;
            for (int j = 0; j < n; ++j) {
                double prev = j == 0 ? cfg.geometry.base_angle
                                     : state.theta[off + j - 1];
                sum += (state.theta[off + j] - prev) / ell;
            }
            o.mean_curvature = sum / n;
            double T_amb = cfg.material.ambient_temperature;
            double first = 0.0, second = 0.0, all = 0.0;
            int half = n / 2;
            for (int j = 0; j < n; ++j) {
                double s = state.T[off + j] - T_amb;
                all += s;
                if (j < half) first += s; else second += s;
            }
            o.delta_T_split = first / std::max(half, 1) -
                              second / std::max(n - half, 1);
            o.delta_T_global = all / n;
        }
    }
    if (state.body_x) o.body_x = *state.body_x;
    return o;
}

ObservablesRecord observables(const SystemState& state, const ScenarioConfig& config) {
    return observables(state, make_world(config));
}

} // namespace photofeedback
