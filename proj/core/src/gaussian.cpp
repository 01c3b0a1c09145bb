#include "handkin/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace handkin {

bool gaussian_valid(const Gaussian& g, double psd_tol) {
  if (g.mean.size() != g.cov.rows() || g.cov.rows() != g.cov.cols()) return false;
  if (!g.mean.allFinite() || !g.cov.allFinite()) return false;
  return is_symmetric(g.cov, 1e-9 * (1.0 + g.cov.cwiseAbs().maxCoeff())) &&
         min_eigenvalue(g.cov) >= -psd_tol;
}

namespace {

Eigen::LLT<MatX> checked_llt(const MatX& S) {
  Eigen::LLT<MatX> llt(S);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("innovation covariance is not positive definite");
  }
  return llt;
}

}  // namespace

double mahalanobis(const VecX& z, const VecX& z_pred, const MatX& S) {
  if (z.size() != z_pred.size() || z.size() != S.rows() || S.rows() != S.cols()) {
    throw std::invalid_argument("mahalanobis: dimension mismatch");
  }
  const VecX nu = z - z_pred;
  const auto llt = checked_llt(S);
  // nu^T S^-1 nu == |L^-1 nu|^2 with S = L L^T.
  const VecX w = llt.matrixL().solve(nu);
  return w.norm();
}

double gaussian_log_likelihood(const VecX& innovation, const MatX& S) {
  if (innovation.size() != S.rows() || S.rows() != S.cols()) {
    throw std::invalid_argument("gaussian_log_likelihood: dimension mismatch");
  }
  const auto llt = checked_llt(S);
  const VecX w = llt.matrixL().solve(innovation);
  double log_det = 0.0;
  for (int i = 0; i < S.rows(); ++i) {
    log_det += 2.0 * std::log(llt.matrixL()(i, i));
  }
  const double n = static_cast<double>(innovation.size());
  return -0.5 * (w.squaredNorm() + log_det + n * std::log(2.0 * std::numbers::pi));
}

}  // namespace handkin
