#include "photofeedback/kinematics.hpp"

namespace photofeedback {

std::vector<Vec2> joint_positions(const ActuatorGeometry& geom,
                                  std::span<const double> theta,
                                  Vec2 base_shift) {
    const double ell = geom.segment_length();
    std::vector<Vec2> p(geom.segment_count + 1);
    p[0] = geom.base_position + base_shift;
    for (int i = 0; i < geom.segment_count; ++i)
        p[i + 1] = p[i] + ell * unit_from_angle(theta[i]);
    return p;
}

BaffleFrame baffle_frame(const Baffle& baffle, const ActuatorGeometry& geom,
                         std::span<const double> theta, Vec2 base_shift) {
    int seg = baffle.attach_segment == kAttachTip ? geom.segment_count - 1
                                                  : baffle.attach_segment;
    const double ell = geom.segment_length();
    Vec2 p = geom.base_position + base_shift;
    for (int i = 0; i <= seg; ++i) p += ell * unit_from_angle(theta[i]);
    BaffleFrame f;
    f.attach_segment = seg;
    f.root = p;
    f.tangent = unit_from_angle(theta[seg] + baffle.offset_angle);
    f.tip = f.root + baffle.length * f.tangent;
    f.centroid = f.root + (0.5 * baffle.length) * f.tangent;
    return f;
}

std::vector<double> chain_angles_from_curvature(const ActuatorGeometry& geom,
                                                std::span<const double> kappa) {
    const double ell = geom.segment_length();
    std::vector<double> theta(geom.segment_count);
    double a = geom.base_angle;
    for (int i = 0; i < geom.segment_count; ++i) {
        a += kappa[i] * ell;
        theta[i] = a;
    }
    return theta;
}

} // namespace photofeedback
