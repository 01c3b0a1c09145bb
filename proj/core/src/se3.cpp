#include "handkin/se3.hpp"

#include <cmath>
#include <numbers>

namespace handkin {

namespace {

constexpr double kTiny = 1e-8;           // below this, use series expansions
constexpr double kBranchTol = 1e-6;      // |theta - pi| flag threshold

// V(w) such that translation = V * rho for the twist (rho, w).
Mat3 left_jacobian(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 W = skew(w);
  if (theta < kTiny) {
    return Mat3::Identity() + 0.5 * W + W * W / 6.0;
  }
  const double t2 = theta * theta;
  return Mat3::Identity() + (1.0 - std::cos(theta)) / t2 * W +
         (theta - std::sin(theta)) / (t2 * theta) * W * W;
}

// V(w)^-1, stable across the whole (0, pi] range.
Mat3 left_jacobian_inverse(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 W = skew(w);
  if (theta < kTiny) {
    return Mat3::Identity() - 0.5 * W + W * W / 12.0;
  }
  const double t2 = theta * theta;
  // c = (1 - theta*sin/(2(1-cos)))/theta^2; series near zero, smooth at pi.
  double c;
  if (theta < 1e-4) {
    c = 1.0 / 12.0 + t2 / 720.0;
  } else {
    c = (1.0 - theta * std::sin(theta) / (2.0 * (1.0 - std::cos(theta)))) / t2;
  }
  return Mat3::Identity() - 0.5 * W + c * W * W;
}

// Unit rotation axis for angles near pi, where R - R^T is rank deficient.
// R = -I + (1+cos)I + ... reduces to n n^T = (R + I - cos*I)/(1 - cos); take
// the strongest diagonal for the magnitude and recover signs from that row.
Vec3 near_pi_axis(const Mat3& R, double cos_theta) {
  const double one_minus = 1.0 - cos_theta;
  Vec3 n2;
  for (int i = 0; i < 3; ++i) {
    n2(i) = std::max(0.0, (R(i, i) - cos_theta) / one_minus);
  }
  int k = 0;
  n2.maxCoeff(&k);
  Vec3 n = Vec3::Zero();
  n(k) = std::sqrt(n2(k));
  for (int j = 0; j < 3; ++j) {
    if (j != k) n(j) = (R(k, j) + R(j, k)) / (2.0 * one_minus * n(k));
  }
  n.normalize();
  // Canonical branch representative: first nonzero component non-negative.
  for (int i = 0; i < 3; ++i) {
    if (std::abs(n(i)) > 1e-12) {
      if (n(i) < 0.0) n = -n;
      break;
    }
  }
  return n;
}

Eigen::Isometry3d exp_raw(const Vec3& linear, const Vec3& angular) {
  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  T.linear() = rodrigues(angular);
  T.translation() = left_jacobian(angular) * linear;
  return T;
}

}  // namespace

Mat3 rodrigues(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 W = skew(w);
  if (theta < kTiny) {
    return Mat3::Identity() + W + 0.5 * W * W;
  }
  const double t2 = theta * theta;
  return Mat3::Identity() + std::sin(theta) / theta * W +
         (1.0 - std::cos(theta)) / t2 * W * W;
}

Pose6::Pose6(const Vec3& lin, const Vec3& ang) : linear(lin), angular(ang) {
  if (angular.norm() >= std::numbers::pi) {
    const LogMapResult principal = log_map_full(exp_raw(linear, angular));
    linear = principal.pose.linear;
    angular = principal.pose.angular;
  }
}

Eigen::Isometry3d exp_map(const Pose6& p) { return exp_raw(p.linear, p.angular); }

LogMapResult log_map_full(const Eigen::Isometry3d& T) {
  const Mat3 R = T.linear();
  const double cos_theta = std::clamp((R.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(cos_theta);

  LogMapResult out;
  Vec3 w;
  if (theta < kTiny) {
    // First order: R ~ I + [w]x.
    w = 0.5 * Vec3(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  } else if (std::numbers::pi - theta < 1e-4) {
    w = theta * near_pi_axis(R, cos_theta);
  } else {
    const Vec3 skew_part(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
    w = theta / (2.0 * std::sin(theta)) * skew_part;
  }
  out.near_branch_cut = (std::numbers::pi - theta) < kBranchTol;
  out.pose.angular = w;
  out.pose.linear = left_jacobian_inverse(w) * T.translation();
  return out;
}

Pose6 log_map(const Eigen::Isometry3d& T) { return log_map_full(T).pose; }

Vec3 transform_point(const Pose6& p, const Vec3& x) { return exp_map(p) * x; }

Vec3 inverse_transform_point(const Pose6& p, const Vec3& x) {
  return exp_map(p).inverse() * x;
}

Pose6 compose(const Pose6& a, const Pose6& b) {
  return log_map(exp_map(a) * exp_map(b));
}

LogMapResult pose_error(const Pose6& prediction, const Pose6& measurement) {
  return log_map_full(exp_map(prediction).inverse() * exp_map(measurement));
}

Eigen::Isometry3d rotation_about_axis(const Vec3& direction, const Vec3& point, double q) {
  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  T.linear() = Eigen::AngleAxisd(q, direction.normalized()).toRotationMatrix();
  T.translation() = point - T.linear() * point;
  return T;
}

}  // namespace handkin
