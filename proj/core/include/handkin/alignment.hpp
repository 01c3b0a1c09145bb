#pragma once

#include <optional>
#include <span>

#include "handkin/se3.hpp"

namespace handkin {

// Weighted least-squares rigid alignment: finds T minimizing
// sum_i w_i |T * a_i - b_i|^2 over proper rotations (cross-covariance SVD).
// Returns nullopt when the problem is degenerate: fewer than 3 points,
// (near-)collinear geometry, or an alignment that would need a reflection.
// Weights default to uniform when empty.
std::optional<Eigen::Isometry3d> rigid_align(std::span<const Vec3> from,
                                             std::span<const Vec3> to,
                                             std::span<const double> weights = {});

}  // namespace handkin
