#include "photofeedback/optics.hpp"

#include <algorithm>
#include <cmath>

#include "photofeedback/kinematics.hpp"

namespace photofeedback {

namespace {

// 6-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGlNode[6] = {-0.932469514203152, -0.661209386466265,
                               -0.238619186083197, 0.238619186083197,
                               0.661209386466265,  0.932469514203152};
constexpr double kGlWeight[6] = {0.171324492379170, 0.360761573048139,
                                 0.467913934572691, 0.467913934572691,
                                 0.360761573048139, 0.171324492379170};

struct ProjectedElement {
    int id = 0;
    double u_lo = 0.0, u_hi = 0.0;     // transverse extent
    double s_lo = 0.0, s_hi = 0.0;     // depth at u_lo / u_hi
    double support_lo = 0.0, support_hi = 0.0; // extent plus edge ramps

    double depth(double u) const {
        if (u_hi == u_lo) return s_lo;
        return s_lo + (s_hi - s_lo) * (u - u_lo) / (u_hi - u_lo);
    }
};

} // namespace

IlluminationResult cast_shadows(const ShadowScene& scene, double eps_s) {
    const auto& beam = scene.beam;
    const Vec2 d = beam.direction;
    const Vec2 m = perp(d);
    const int n = (int)scene.elements.size();

    IlluminationResult out;
    out.fraction.assign(n, 0.0);
    out.incidence.assign(n, 0.0);
    out.signed_incidence.assign(n, 0.0);
    out.absorbed.assign(n, 0.0);

    const double ap_lo = beam.aperture_lo;
    const double ap_hi = beam.aperture_hi;
    const double scale = beam.intensity * scene.width;
    out.entering = scale * (ap_hi - ap_lo);

    // Project opaque elements onto (transverse u, depth s) coordinates.
    std::vector<ProjectedElement> proj;
    std::vector<double> extent(n, 0.0);
    proj.reserve(n);
    for (int i = 0; i < n; ++i) {
        const auto& e = scene.elements[i];
        Vec2 t = (e.b - e.a);
        double len = t.norm();
        if (len > 0) {
            Vec2 tangent = t / len;
            double sgn = -dot(perp(tangent), d);
            out.signed_incidence[i] = sgn;
            out.incidence[i] = std::abs(sgn);
        }
        double ua = dot(e.a, m), ub = dot(e.b, m);
        double sa = dot(e.a, d), sb = dot(e.b, d);
        if (ua > ub) { std::swap(ua, ub); std::swap(sa, sb); }
        extent[i] = ub - ua;
        if (!e.opaque) continue;
        if (ub - ua < 1e-15) continue; // parallel to the beam: f stays 0
        ProjectedElement p;
        p.id = i;
        p.u_lo = ua; p.u_hi = ub; p.s_lo = sa; p.s_hi = sb;
        p.support_lo = ua - 0.5 * eps_s;
        p.support_hi = ub + 0.5 * eps_s;
        proj.push_back(p);
    }

    // Breakpoints: aperture ends, ramp corners, and pairwise depth crossings.
    std::vector<double> cuts{ap_lo, ap_hi};
    for (const auto& p : proj) {
        for (double u : {p.support_lo, p.u_lo + 0.5 * eps_s,
                         p.u_hi - 0.5 * eps_s, p.support_hi})
            if (u > ap_lo && u < ap_hi) cuts.push_back(u);
    }
    for (std::size_t i = 0; i < proj.size(); ++i) {
        for (std::size_t j = i + 1; j < proj.size(); ++j) {
            const auto& A = proj[i];
            const auto& B = proj[j];
            double lo = std::max({A.support_lo, B.support_lo, ap_lo});
            double hi = std::min({A.support_hi, B.support_hi, ap_hi});
            if (hi <= lo) continue;
            // depth_A(u) - depth_B(u) is linear; find its root.
            double fa = A.depth(lo) - B.depth(lo);
            double fb = A.depth(hi) - B.depth(hi);
            if (fa * fb < 0) cuts.push_back(lo + (hi - lo) * fa / (fa - fb));
        }
    }
    std::sort(cuts.begin(), cuts.end());

    std::vector<double> received(n, 0.0); // transverse measure per element
    double transmitted_measure = 0.0;

    std::vector<const ProjectedElement*> active;
    for (std::size_t ci = 0; ci + 1 < cuts.size(); ++ci) {
        double x0 = cuts[ci], x1 = cuts[ci + 1];
        if (x1 - x0 < 1e-18) continue;
        double mid = 0.5 * (x0 + x1);
        active.clear();
        for (const auto& p : proj)
            if (mid > p.support_lo && mid < p.support_hi) active.push_back(&p);
        std::sort(active.begin(), active.end(),
                  [mid](const ProjectedElement* a, const ProjectedElement* b) {
                      return a->depth(mid) < b->depth(mid);
                  });
        double half = 0.5 * (x1 - x0);
        for (int g = 0; g < 6; ++g) {
            double u = mid + half * kGlNode[g];
            double wgt = half * kGlWeight[g];
            double remaining = 1.0;
            for (const auto* p : active) {
                double ramp_in = std::clamp((u - p->support_lo) / eps_s, 0.0, 1.0);
                double ramp_out = std::clamp((p->support_hi - u) / eps_s, 0.0, 1.0);
                double cov = ramp_in * ramp_out;
                double recv = remaining * cov;
                received[p->id] += wgt * recv;
                remaining -= recv;
            }
            transmitted_measure += wgt * remaining;
        }
    }

    for (int i = 0; i < n; ++i) {
        const auto& e = scene.elements[i];
        if (extent[i] > 1e-15)
            out.fraction[i] = std::clamp(received[i] / extent[i], 0.0, 1.0);
        double power = scale * received[i];
        if (e.is_baffle) {
            out.blocked += power;
        } else {
            out.absorbed[i] = e.absorptance * power;
            out.unabsorbed += (1.0 - e.absorptance) * power;
        }
    }
    out.transmitted = scale * transmitted_measure;
    return out;
}

ShadowScene build_scene(const LightField& light,
                        const std::vector<ScenarioConfig>& units,
                        const std::vector<SystemState>& unit_states,
                        Vec2 base_shift) {
    ShadowScene scene;
    scene.beam = Beam{light.direction, light.intensity, light.aperture_lo,
                      light.aperture_hi};
    scene.width = units.empty() ? 1.0 : units.front().geometry.width;
    for (std::size_t u = 0; u < units.size(); ++u) {
        const auto& cfg = units[u];
        const auto& st = unit_states[u];
        auto pos = joint_positions(cfg.geometry, st.theta, base_shift);
        for (int i = 0; i < cfg.geometry.segment_count; ++i) {
            SceneElement e;
            e.a = pos[i];
            e.b = pos[i + 1];
            e.unit = (int)u;
            e.index = i;
            e.absorptance = cfg.material.absorptance;
            scene.elements.push_back(e);
        }
        for (std::size_t bi = 0; bi < cfg.baffles.size(); ++bi) {
            auto f = baffle_frame(cfg.baffles[bi], cfg.geometry, st.theta, base_shift);
            SceneElement e;
            e.a = f.root;
            e.b = f.tip;
            e.is_baffle = true;
            e.unit = (int)u;
            e.index = (int)bi;
            e.opaque = cfg.baffles[bi].opaque;
            scene.elements.push_back(e);
        }
    }
    return scene;
}

} // namespace photofeedback
