#pragma once

#include <Eigen/Dense>

namespace handkin {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat7 = Eigen::Matrix<double, 7, 7>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

// Averaging with the transpose keeps covariances bitwise symmetric after
// every filter step: (a+b)/2 == (b+a)/2 in IEEE arithmetic.
template <typename Derived>
void symmetrize_in_place(Eigen::MatrixBase<Derived>& m) {
  m = ((m + m.transpose()) * 0.5).eval();
}

inline bool is_symmetric(const MatX& m, double tol = 0.0) {
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

inline double min_eigenvalue(const MatX& m) {
  Eigen::SelfAdjointEigenSolver<MatX> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline bool is_psd(const MatX& m, double tol = 1e-9) {
  return is_symmetric(m, 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) &&
         min_eigenvalue(m) >= -tol;
}

// Central-difference Jacobian of f: R^n -> R^m evaluated at x.
template <typename F>
MatX numeric_jacobian(F&& f, const VecX& x, double step = 1e-6) {
  const VecX f0 = f(x);
  MatX jac(f0.size(), x.size());
  VecX xp = x;
  for (int i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + step;
    const VecX hi = f(xp);
    xp(i) = x(i) - step;
    const VecX lo = f(xp);
    xp(i) = x(i);
    jac.col(i) = (hi - lo) / (2.0 * step);
  }
  return jac;
}

}  // namespace handkin
