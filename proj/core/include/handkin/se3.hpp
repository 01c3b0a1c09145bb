#pragma once

#include <Eigen/Geometry>

#include "handkin/linalg.hpp"

namespace handkin {

/*
 * Rigid-body pose in exponential coordinates: a 6-vector twist
 * (linear; angular) with T = exp([xi]). The angular part is kept on the
 * principal branch, |angular| < pi; constructing a Pose6 with a larger
 * rotation renormalizes onto the equivalent principal representative
 * (the linear part is recomputed so the underlying transform is preserved).
 */
struct Pose6 {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();

  Pose6() = default;
  Pose6(const Vec3& lin, const Vec3& ang);

  Vec6 vec() const {
    Vec6 v;
    v << linear, angular;
    return v;
  }
  static Pose6 from_vec(const Vec6& v) { return Pose6(v.head<3>(), v.tail<3>()); }
};

// Spatial velocity twist (linear; angular), world frame. Unlike Pose6 this is
// a free vector: no branch constraint, any finite value is meaningful.
struct Velocity6 {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();

  Vec6 vec() const {
    Vec6 v;
    v << linear, angular;
    return v;
  }
  static Velocity6 from_vec(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }
};

// Rodrigues rotation: exp([w]x). Series fallback below 1e-8 rotation.
Mat3 rodrigues(const Vec3& w);

// exp: twist -> homogeneous transform. Total (defined for any input norm).
Eigen::Isometry3d exp_map(const Pose6& p);

struct LogMapResult {
  Pose6 pose;
  // Rotation angle within 1e-6 of pi: the returned representative is the
  // canonical one (first nonzero axis component >= 0) but callers doing
  // incremental corrections should treat the chart as unreliable here.
  bool near_branch_cut = false;
};

// log: transform -> principal twist, |angular| <= pi. Near-pi extraction uses
// the diagonal method (the skew part of R vanishes there).
LogMapResult log_map_full(const Eigen::Isometry3d& T);
Pose6 log_map(const Eigen::Isometry3d& T);

Vec3 transform_point(const Pose6& p, const Vec3& x);
Vec3 inverse_transform_point(const Pose6& p, const Vec3& x);

// log(exp(a) * exp(b)) on the principal branch.
Pose6 compose(const Pose6& a, const Pose6& b);

// exp(-xi) = exp(xi)^-1, and negation preserves the branch bound.
inline Pose6 pose_inverse(const Pose6& p) {
  Pose6 q;
  q.linear = -p.linear;
  q.angular = -p.angular;
  return q;
}

// Twist of the relative transform prediction^-1 * measurement; the standard
// innovation residual for pose measurements.
LogMapResult pose_error(const Pose6& prediction, const Pose6& measurement);

// Rotation by angle q about the line (point, unit direction).
Eigen::Isometry3d rotation_about_axis(const Vec3& direction, const Vec3& point, double q);

}  // namespace handkin
