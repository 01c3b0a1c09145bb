#include "handkin/alignment.hpp"

#include <stdexcept>

namespace handkin {

std::optional<Eigen::Isometry3d> rigid_align(std::span<const Vec3> from,
                                             std::span<const Vec3> to,
                                             std::span<const double> weights) {
  const std::size_t n = from.size();
  if (to.size() != n || (!weights.empty() && weights.size() != n)) {
    throw std::invalid_argument("rigid_align: size mismatch");
  }
  if (n < 3) return std::nullopt;

  double wsum = 0.0;
  Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    ca += w * from[i];
    cb += w * to[i];
    wsum += w;
  }
  if (wsum <= 0.0) return std::nullopt;
  ca /= wsum;
  cb /= wsum;

  Mat3 cross = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    cross += w * (to[i] - cb) * (from[i] - ca).transpose();
  }

  Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  // Collinear source or target geometry leaves the rotation about the line
  // unconstrained; the second singular value collapsing is the symptom.
  if (sv(1) <= 1e-12 * std::max(1.0, sv(0))) return std::nullopt;
  // A reflection (negative determinant) cannot come from rigid motion of
  // non-degenerate data; reject rather than silently flipping a column.
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) {
    return std::nullopt;
  }

  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  T.linear() = svd.matrixU() * svd.matrixV().transpose();
  T.translation() = cb - T.linear() * ca;
  return T;
}

}  // namespace handkin
