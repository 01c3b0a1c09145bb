#pragma once

#include <span>

#include "handkin/joint_estimator.hpp"
#include "handkin/se3.hpp"

namespace handkin {

/*
 * Reference articulation an estimate is scored against. q_max is the
 * articulation range covered by the demonstration (radians for revolute,
 * meters for prismatic); grasp_point is the point whose admissible motion
 * direction is compared (for synthetic data: the rest centroid of the
 * rigid landmark constellation).
 */
struct GroundTruthJoint {
  JointType type = JointType::Prismatic;
  Vec3 axis_direction = Vec3::UnitX();  // unit
  Vec3 axis_point = Vec3::Zero();       // revolute only
  double q_max = 0.0;                   // > 0
  Vec3 grasp_point = Vec3::Zero();
};

// grasp_point articulated to configuration q (identity at q = 0).
Vec3 articulated_point(const GroundTruthJoint& joint, double q, const Vec3& point);

// Unit tangent of the admissible motion at configuration q: the axis
// direction for prismatic joints, d x (p(q) - a) normalized for revolute.
// Throws std::domain_error when the grasp point sits on a revolute axis
// (zero radius, tangent undefined).
Vec3 tangent_at(const GroundTruthJoint& joint, double q, const Vec3& grasp_point);

/*
 * Mean angular deviation (degrees) between estimated and ground-truth
 * admissible-motion directions along the true grasp-point trajectory,
 * averaged over q in [0, q_max] by uniform trapezoid quadrature with
 * `samples` nodes. Axis sign is a gauge, so each sample scores
 * min(theta, 180 - theta). When both joints are prismatic the tangents are
 * constant and the single angle is returned directly.
 *
 * The estimate must carry an axis (prismatic or revolute); anything else
 * throws std::invalid_argument.
 */
double tangent_error_deg(const JointModel& est, const GroundTruthJoint& gt,
                         int samples = 100);
double tangent_error_deg(const GroundTruthJoint& est, const GroundTruthJoint& gt,
                         int samples = 100);

// --- Offline baselines (for benchmark comparison) ---

struct TrackPoint {
  double t = 0.0;
  Vec3 pos = Vec3::Zero();
};

/*
 * Screw fit to a single landmark trajectory: least-squares line (prismatic
 * hypothesis) vs plane + circle (revolute hypothesis), type chosen by
 * residual. The circle fit must beat the line fit by a clear factor to be
 * selected -- a line is the infinite-radius limit of a circle, so raw
 * residual comparison would always prefer revolute -- and implausibly large
 * radii fall back to prismatic. Needs >= 3 points; throws std::domain_error
 * on a degenerate (coincident) track.
 */
JointModel baseline_single_point(std::span<const TrackPoint> track);

struct PoseSample {
  double t = 0.0;
  Pose6 pose;  // relative to the initial hand pose
};

/*
 * Screw fit to a relative pose sequence. Poses on a fixed screw have twists
 * on a common line through the origin in 6-d exponential coordinates, so the
 * axis is the principal component of the twist scatter; revolute when the
 * sequence contains measurable rotation, prismatic otherwise, with the axis
 * point recovered as w x v / |w|^2. Throws std::domain_error when the
 * sequence never leaves the initial pose (insufficient motion).
 */
JointModel baseline_rigid_hand(std::span<const PoseSample> poses);

}  // namespace handkin
