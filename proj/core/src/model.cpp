#include "photofeedback/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "photofeedback/kinematics.hpp"

namespace photofeedback {

std::string ValidationResult::summary() const {
    std::ostringstream os;
    for (const auto& i : issues) os << i.field << ": " << i.message << "\n";
    return os.str();
}

namespace {

void require(ValidationResult& r, bool ok, const std::string& field,
             const std::string& message) {
    if (!ok) r.issues.push_back({field, message});
}

void validate_schedule(ValidationResult& r, const Schedule& s, const std::string& field) {
    for (std::size_t i = 0; i < s.intervals.size(); ++i) {
        auto [a, b] = s.intervals[i];
        require(r, b > a, field + ".intervals." + std::to_string(i),
                "interval end must exceed start");
    }
}

} // namespace

ValidationResult validate(ScenarioConfig& c) {
    ValidationResult r;
    auto& g = c.geometry;
    require(r, g.length > 0, "geometry.length", "length must be > 0");
    require(r, g.width > 0, "geometry.width", "width must be > 0");
    require(r, g.thickness > 0, "geometry.thickness", "thickness must be > 0");
    require(r, g.segment_count >= 2, "geometry.segment_count", "segment_count >= 2");
    if (g.rest_curvature.empty() && g.segment_count >= 2)
        g.rest_curvature.assign(g.segment_count, 0.0);
    require(r, (int)g.rest_curvature.size() == g.segment_count,
            "geometry.rest_curvature",
            "rest_curvature must have exactly segment_count entries");

    const auto& m = c.material;
    require(r, m.heat_capacity > 0, "material.heat_capacity", "C must be > 0");
    require(r, m.heat_loss > 0, "material.heat_loss", "h must be > 0");
    require(r, m.joint_stiffness > 0, "material.joint_stiffness", "k must be > 0");
    require(r, m.joint_damping >= 0, "material.joint_damping", "c must be >= 0");
    require(r, m.linear_density > 0, "material.linear_density", "rho must be > 0");
    require(r, m.absorptance > 0 && m.absorptance <= 1, "material.absorptance",
            "a must be in (0, 1]");
    require(r, m.ambient_temperature > 0, "material.ambient_temperature",
            "T_amb must be > 0");

    for (std::size_t i = 0; i < c.baffles.size(); ++i) {
        const auto& b = c.baffles[i];
        std::string f = "baffles." + std::to_string(i);
        require(r, b.length > 0, f + ".length", "length must be > 0");
        require(r, b.width > 0, f + ".width", "width must be > 0");
        require(r, b.attach_segment == kAttachTip ||
                   (b.attach_segment >= 0 && b.attach_segment < g.segment_count),
                f + ".attach_segment", "attach_segment out of range");
        require(r, b.drag_coefficient >= 0, f + ".drag_coefficient", "Cd must be >= 0");
    }

    for (std::size_t i = 0; i < c.lights.size(); ++i) {
        auto& l = c.lights[i];
        std::string f = "lights." + std::to_string(i);
        require(r, std::abs(l.direction.norm() - 1.0) <= 1e-12, f + ".direction",
                "light direction not unit");
        require(r, l.intensity >= 0, f + ".intensity", "intensity must be >= 0");
        require(r, l.aperture_hi > l.aperture_lo, f + ".aperture",
                "aperture must have positive width");
        validate_schedule(r, l.schedule, f + ".schedule");
    }

    for (std::size_t i = 0; i < c.disturbances.size(); ++i) {
        auto& d = c.disturbances[i];
        std::string f = "disturbances." + std::to_string(i);
        require(r, std::abs(d.direction.norm() - 1.0) <= 1e-12, f + ".direction",
                "disturbance direction not unit");
        require(r, d.magnitude >= 0, f + ".magnitude", "magnitude must be >= 0");
        require(r, d.noise_fraction >= 0, f + ".noise_fraction",
                "noise fraction must be >= 0");
        validate_schedule(r, d.schedule, f + ".schedule");
    }

    const auto& b = c.body;
    if (b.kind == BodyKind::crawler) {
        require(r, b.friction_forward >= 0 && b.friction_backward >= 0,
                "body.friction", "friction coefficients must be >= 0");
        require(r, b.friction_forward != b.friction_backward, "body.friction",
                "crawler requires mu_f != mu_b (friction bias)");
        require(r, b.body_mass > 0, "body.body_mass", "m_b must be > 0");
        require(r, b.normal_load > 0, "body.normal_load", "normal_load must be > 0");
        require(r, b.wheel_radius > 0, "body.wheel_radius", "wheel_radius must be > 0");
    } else if (b.kind == BodyKind::swimmer) {
        require(r, b.thrust_coeff >= 0, "body.thrust_coeff", "k_t must be >= 0");
        require(r, b.linear_drag > 0, "body.linear_drag", "c_d must be > 0");
        require(r, b.body_mass > 0, "body.body_mass", "m_b must be > 0");
    }

    auto& s = c.integrator;
    require(r, s.dt > 0, "integrator.dt", "dt must be > 0");
    require(r, s.t_end > 0, "integrator.t_end", "t_end must be > 0");
    require(r, s.sample_stride >= 1, "integrator.sample_stride", "stride >= 1");
    require(r, s.rel_tol > 0 && s.abs_tol > 0, "integrator.tolerances",
            "tolerances must be > 0");
    // Step-size bound: dt <= 0.05 min(2*pi/omega_max, tau_th).
    if (r.ok() && s.method == IntegrationMethod::rk4_fixed && !c.overdamped) {
        double ell = g.segment_length();
        double inertia = m.linear_density * ell * ell * ell / 3.0;
        double omega_max = std::sqrt(m.joint_stiffness / inertia);
        double tau_th = m.heat_capacity / m.heat_loss;
        double dt_max = 0.05 * std::min(2.0 * M_PI / omega_max, tau_th);
        require(r, s.dt <= dt_max, "integrator.dt",
                "dt exceeds 0.05*min(2pi/omega_max, tau_th) = " + std::to_string(dt_max));
    }

    if (c.shadow_smoothing <= 0) c.shadow_smoothing = g.length / 200.0;
    return r;
}

ValidationResult validate(ChainConfig& chain) {
    ValidationResult r;
    require(r, chain.unit_count >= 1, "unit_count", "unit_count must be >= 1");
    require(r, chain.spacing > 0, "spacing", "spacing must be > 0");
    if (!chain.spacings.empty())
        require(r, (int)chain.spacings.size() == chain.unit_count - 1, "spacings",
                "per-gap spacings must have unit_count-1 entries");
    for (double s : chain.spacings)
        require(r, s > 0, "spacings", "spacing must be > 0");
    auto sub = validate(chain.unit);
    for (auto& i : sub.issues) r.issues.push_back({"unit." + i.field, i.message});
    for (std::size_t i = 0; i < chain.shared_lights.size(); ++i) {
        auto& l = chain.shared_lights[i];
        std::string f = "shared_lights." + std::to_string(i);
        require(r, std::abs(l.direction.norm() - 1.0) <= 1e-12, f + ".direction",
                "light direction not unit");
        require(r, l.intensity >= 0, f + ".intensity", "intensity must be >= 0");
        require(r, l.aperture_hi > l.aperture_lo, f + ".aperture",
                "aperture must have positive width");
    }
    return r;
}

SystemState rest_state(const ScenarioConfig& config) {
    const auto& g = config.geometry;
    SystemState s;
    s.theta = chain_angles_from_curvature(g, g.rest_curvature);
    s.omega.assign(g.segment_count, 0.0);
    s.T.assign(g.segment_count, config.material.ambient_temperature);
    if (config.body.kind != BodyKind::none) {
        s.body_x = 0.0;
        s.body_v = 0.0;
    }
    return s;
}

namespace {

// Reflection about the line through `origin` with unit direction `axis`.
struct Reflection {
    Vec2 origin;
    Vec2 axis;

    Vec2 point(Vec2 p) const {
        Vec2 rel = p - origin;
        double along = dot(rel, axis);
        double across = dot(rel, perp(axis));
        return origin + axis * along - perp(axis) * across;
    }
    Vec2 vector(Vec2 v) const {
        double along = dot(v, axis);
        double across = dot(v, perp(axis));
        return axis * along - perp(axis) * across;
    }
    double angle(double a) const {
        double axis_angle = std::atan2(axis.y, axis.x);
        return 2.0 * axis_angle - a;
    }
};

Reflection mirror_axis(const ScenarioConfig& config) {
    Vec2 dir{0.0, -1.0};
    if (!config.lights.empty()) dir = config.lights.front().direction;
    return Reflection{config.geometry.base_position, dir};
}

LightField mirror_light(const LightField& l, const Reflection& R) {
    LightField out = l;
    out.direction = R.vector(l.direction);
    // The transverse coordinate is u = p . perp(direction); reflect the two
    // aperture boundary points and recompute.
    Vec2 m_old = perp(l.direction);
    Vec2 m_new = perp(out.direction);
    double a = dot(R.point(m_old * l.aperture_lo), m_new);
    double b = dot(R.point(m_old * l.aperture_hi), m_new);
    out.aperture_lo = std::min(a, b);
    out.aperture_hi = std::max(a, b);
    return out;
}

} // namespace

ScenarioConfig mirror(const ScenarioConfig& config) {
    Reflection R = mirror_axis(config);
    ScenarioConfig out = config;
    out.geometry.base_position = R.point(config.geometry.base_position);
    out.geometry.base_angle = R.angle(config.geometry.base_angle);
    for (auto& k : out.geometry.rest_curvature) k = -k;
    for (auto& b : out.baffles) b.offset_angle = -b.offset_angle;
    for (auto& l : out.lights) l = mirror_light(l, R);
    for (auto& d : out.disturbances) d.direction = R.vector(d.direction);
    return out;
}

SystemState mirror(const SystemState& state, const ScenarioConfig& config) {
    Reflection R = mirror_axis(config);
    SystemState out = state;
    for (auto& a : out.theta) a = R.angle(a);
    for (auto& w : out.omega) w = -w;
    double T_amb = config.material.ambient_temperature;
    for (auto& T : out.T) T = 2.0 * T_amb - T; // signed elevation flips face
    return out;
}

} // namespace photofeedback
