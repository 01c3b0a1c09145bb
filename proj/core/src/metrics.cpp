#include "handkin/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "handkin/axis.hpp"

namespace handkin {

namespace {

constexpr double kZeroRadius = 1e-9;
// A circle can always undercut a line on residual (a line is its infinite-
// radius limit), so the revolute hypothesis must win by this factor.
constexpr double kCircleAdvantage = 0.6;
constexpr double kRadiusCap = 5.0;  // meters; larger fits are lines in disguise
// Rigid-hand fit: call a sequence revolute once it contains this much
// rotation; below it the rotation component is indistinguishable from noise.
const double kMinRotationForRevolute = 2.0 * std::numbers::pi / 180.0;

double rad_to_deg(double r) { return r * 180.0 / std::numbers::pi; }

struct AxisSpec {
  JointType type;
  Vec3 direction;  // unit
  Vec3 point;      // revolute only
};

Vec3 motion_tangent(const AxisSpec& ax, const Vec3& p) {
  if (ax.type == JointType::Prismatic) return ax.direction;
  const Vec3 v = ax.direction.cross(p - ax.point);
  const double n = v.norm();
  if (n < kZeroRadius) {
    throw std::domain_error("tangent undefined: evaluation point lies on the joint axis");
  }
  return v / n;
}

// Angle between motion directions with the axis-sign gauge removed.
double angle_deg(const Vec3& a, const Vec3& b) {
  const double c = std::clamp(a.dot(b), -1.0, 1.0);
  const double theta = std::acos(c);
  return rad_to_deg(std::min(theta, std::numbers::pi - theta));
}

AxisSpec validated_axis(JointType type, const Vec3& direction, const Vec3& point,
                        const char* who) {
  if (type != JointType::Prismatic && type != JointType::Revolute) {
    throw std::invalid_argument(std::string(who) + " is not a prismatic or revolute model");
  }
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument(std::string(who) + " has no usable axis direction");
  }
  return {type, direction / n, point};
}

double tangent_error_impl(const AxisSpec& est, const GroundTruthJoint& gt, int samples) {
  if (samples < 2) throw std::invalid_argument("tangent error: samples must be >= 2");
  if (!(gt.q_max > 0.0)) throw std::invalid_argument("tangent error: gt q_max must be > 0");
  const AxisSpec gts = validated_axis(gt.type, gt.axis_direction, gt.axis_point, "ground truth");

  if (est.type == JointType::Prismatic && gts.type == JointType::Prismatic) {
    // Both tangents are constant; the integral collapses to one angle.
    return angle_deg(est.direction, gts.direction);
  }

  double sum = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double q = gt.q_max * static_cast<double>(i) / (samples - 1);
    const Vec3 p = articulated_point(gt, q, gt.grasp_point);
    const double theta = angle_deg(motion_tangent(gts, p), motion_tangent(est, p));
    sum += (i == 0 || i == samples - 1) ? 0.5 * theta : theta;
  }
  return sum / (samples - 1);
}

}  // namespace

Vec3 articulated_point(const GroundTruthJoint& joint, double q, const Vec3& point) {
  const AxisSpec ax =
      validated_axis(joint.type, joint.axis_direction, joint.axis_point, "joint");
  if (ax.type == JointType::Prismatic) return point + q * ax.direction;
  return rotation_about_axis(ax.direction, ax.point, q) * point;
}

Vec3 tangent_at(const GroundTruthJoint& joint, double q, const Vec3& grasp_point) {
  const AxisSpec ax =
      validated_axis(joint.type, joint.axis_direction, joint.axis_point, "joint");
  return motion_tangent(ax, articulated_point(joint, q, grasp_point));
}

double tangent_error_deg(const JointModel& est, const GroundTruthJoint& gt, int samples) {
  if (est.type != JointType::Prismatic && est.type != JointType::Revolute) {
    throw std::invalid_argument("tangent error: estimate carries no joint axis");
  }
  const Vec3 d = est.axis_direction().value();
  const Vec3 a = est.axis_point().value_or(Vec3::Zero());
  return tangent_error_impl(validated_axis(est.type, d, a, "estimate"), gt, samples);
}

double tangent_error_deg(const GroundTruthJoint& est, const GroundTruthJoint& gt,
                         int samples) {
  return tangent_error_impl(
      validated_axis(est.type, est.axis_direction, est.axis_point, "estimate"), gt, samples);
}

JointModel baseline_single_point(std::span<const TrackPoint> track) {
  const int n = static_cast<int>(track.size());
  if (n < 3) throw std::invalid_argument("single-point fit: need at least 3 points");

  Vec3 c = Vec3::Zero();
  for (const auto& s : track) c += s.pos;
  c /= n;

  Mat3 scatter = Mat3::Zero();
  for (const auto& s : track) {
    const Vec3 d = s.pos - c;
    scatter += d * d.transpose();
  }
  scatter /= n;

  Eigen::SelfAdjointEigenSolver<Mat3> es(scatter);
  const Vec3 evals = es.eigenvalues();  // ascending
  if (evals(2) < 1e-16) throw std::domain_error("single-point fit: degenerate track");

  const Vec3 line_dir = es.eigenvectors().col(2);
  const double line_rms = std::sqrt(std::max(0.0, evals(0) + evals(1)));

  // Revolute hypothesis: least-squares plane (smallest scatter direction),
  // then an algebraic circle fit in that plane.
  const Vec3 normal = es.eigenvectors().col(0);
  const Vec3 u = es.eigenvectors().col(2);
  const Vec3 v = es.eigenvectors().col(1);

  MatX A(n, 3);
  VecX rhs(n);
  VecX zs(n);
  for (int i = 0; i < n; ++i) {
    const Vec3 d = track[i].pos - c;
    const double x = d.dot(u), y = d.dot(v);
    A.row(i) << 2.0 * x, 2.0 * y, 1.0;
    rhs(i) = x * x + y * y;
    zs(i) = d.dot(normal);
  }

  bool circle_ok = false;
  double circle_rms = std::numeric_limits<double>::infinity();
  double radius = 0.0;
  Vec3 center = Vec3::Zero();
  Eigen::ColPivHouseholderQR<MatX> qr(A);
  qr.setThreshold(1e-10);
  if (qr.rank() == 3) {
    const VecX sol = qr.solve(rhs);
    const double r2 = sol(2) + sol(0) * sol(0) + sol(1) * sol(1);
    if (r2 > 0.0) {
      circle_ok = true;
      radius = std::sqrt(r2);
      center = c + sol(0) * u + sol(1) * v;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        const double x = A(i, 0) / 2.0 - sol(0);
        const double y = A(i, 1) / 2.0 - sol(1);
        const double dr = std::hypot(x, y) - radius;
        acc += dr * dr + zs(i) * zs(i);
      }
      circle_rms = std::sqrt(acc / n);
    }
  }

  JointModel out;
  if (circle_ok && radius <= kRadiusCap && circle_rms < kCircleAdvantage * line_rms) {
    RevoluteState rs;
    rs.axis = axis_from_direction(normal);
    rs.point = center;
    out.type = JointType::Revolute;
    out.params = rs;
  } else {
    PrismaticState ps;
    ps.axis = axis_from_direction(line_dir);
    out.type = JointType::Prismatic;
    out.params = ps;
  }
  return out;
}

JointModel baseline_rigid_hand(std::span<const PoseSample> poses) {
  if (poses.size() < 2) throw std::invalid_argument("rigid-hand fit: need at least 2 poses");

  double max_rot = 0.0, max_trans = 0.0;
  Mat6 scatter = Mat6::Zero();
  for (const auto& s : poses) {
    max_rot = std::max(max_rot, s.pose.angular.norm());
    max_trans = std::max(max_trans, s.pose.linear.norm());
    const Vec6 xi = s.pose.vec();
    scatter += xi * xi.transpose();
  }
  if (max_rot < std::numbers::pi / 180.0 && max_trans < 1e-3) {
    throw std::domain_error("rigid-hand fit: insufficient motion");
  }

  Eigen::SelfAdjointEigenSolver<Mat6> es(scatter);
  const Vec6 screw = es.eigenvectors().col(5);  // dominant twist direction
  const Vec3 v = screw.head<3>();
  const Vec3 w = screw.tail<3>();

  // Classify by the rotation the fitted screw actually accumulates, not the
  // raw per-frame maximum: frame-to-frame alignment jitter easily exceeds a
  // couple of degrees but does not project onto the dominant twist.
  double q_extent = 0.0;
  for (const auto& s : poses) {
    q_extent = std::max(q_extent, std::abs(screw.dot(s.pose.vec())));
  }
  const double screw_rotation = q_extent * w.norm();

  JointModel out;
  if (screw_rotation >= kMinRotationForRevolute && w.norm() > kZeroRadius) {
    RevoluteState rs;
    const Vec3 d = w.normalized();
    rs.axis = axis_from_direction(d);
    rs.point = w.cross(v) / w.squaredNorm();
    out.type = JointType::Revolute;
    out.params = rs;
  } else {
    if (v.norm() < kZeroRadius) {
      throw std::domain_error("rigid-hand fit: insufficient motion");
    }
    PrismaticState ps;
    ps.axis = axis_from_direction(v.normalized());
    out.type = JointType::Prismatic;
    out.params = ps;
  }
  return out;
}

}  // namespace handkin
