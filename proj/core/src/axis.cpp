#include "handkin/axis.hpp"

#include <cmath>
#include <numbers>

namespace handkin {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phi(double phi) {
  phi = std::fmod(phi, kTwoPi);
  if (phi < 0.0) phi += kTwoPi;
  return phi;
}
}  // namespace

Vec3 axis_direction(const AxisSpherical& a) {
  const double st = std::sin(a.theta);
  return Vec3(st * std::cos(a.phi), st * std::sin(a.phi), std::cos(a.theta));
}

AxisSpherical axis_from_direction(const Vec3& unit_dir) {
  AxisSpherical a;
  a.theta = std::acos(std::clamp(unit_dir.z(), -1.0, 1.0));
  const double sxy = std::hypot(unit_dir.x(), unit_dir.y());
  a.phi = (sxy < 1e-12) ? 0.0 : wrap_phi(std::atan2(unit_dir.y(), unit_dir.x()));
  return a;
}

AxisSpherical axis_normalized(AxisSpherical a) {
  // Fold theta into [0, pi]; each fold mirrors phi by pi.
  a.theta = std::fmod(a.theta, kTwoPi);
  if (a.theta < 0.0) a.theta += kTwoPi;
  if (a.theta > std::numbers::pi) {
    a.theta = kTwoPi - a.theta;
    a.phi += std::numbers::pi;
  }
  a.phi = wrap_phi(a.phi);
  return a;
}

Vec3 canonical_direction(const Vec3& d, double tol) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d(i)) > tol) {
      return d(i) < 0.0 ? Vec3(-d) : d;
    }
  }
  return d;
}

}  // namespace handkin
