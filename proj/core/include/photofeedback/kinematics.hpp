#pragma once

#include <span>
#include <vector>

#include "photofeedback/model.hpp"

namespace photofeedback {

// Joint positions of a segment chain: N+1 points, p[0] = base.
// base_shift displaces the base (crawler body coordinate).
std::vector<Vec2> joint_positions(const ActuatorGeometry& geom,
                                  std::span<const double> theta,
                                  Vec2 base_shift = {});

struct BaffleFrame {
    Vec2 root;      // attachment point (distal end of the attach segment)
    Vec2 tip;
    Vec2 tangent;   // unit vector root -> tip
    Vec2 centroid;
    int attach_segment; // resolved index
};

BaffleFrame baffle_frame(const Baffle& baffle, const ActuatorGeometry& geom,
                         std::span<const double> theta, Vec2 base_shift = {});

// Static equilibrium chain angles for a given per-segment curvature.
std::vector<double> chain_angles_from_curvature(const ActuatorGeometry& geom,
                                                std::span<const double> kappa);

} // namespace photofeedback
