#pragma once

#include "handkin/linalg.hpp"

namespace handkin {

// Unit axis direction in spherical angles, the minimal 2-parameter form the
// joint filters carry in their state vectors. phi in [0, 2pi), theta in [0, pi].
struct AxisSpherical {
  double phi = 0.0;
  double theta = 0.0;
};

// (sin th cos ph, sin th sin ph, cos th); theta = 0 maps to +z.
Vec3 axis_direction(const AxisSpherical& a);

// Inverse of axis_direction for a unit vector; phi = 0 at the poles.
AxisSpherical axis_from_direction(const Vec3& unit_dir);

// Fold (phi, theta) back into range after an additive filter update.
AxisSpherical axis_normalized(AxisSpherical a);

// Flip so the first component with |.| > tol is non-negative. Axes are
// direction lines, not rays: d and -d describe the same joint with q negated,
// and every consumer compares in this canonical form.
Vec3 canonical_direction(const Vec3& d, double tol = 1e-12);

}  // namespace handkin
