#pragma once

#include "handkin/linalg.hpp"

namespace handkin {

// Multivariate normal belief. cov must stay symmetric and PSD up to a
// -1e-9 eigenvalue slack; filters re-symmetrize after every update and
// gaussian_valid() is the debug/test hook for the invariant.
struct Gaussian {
  VecX mean;
  MatX cov;
};

bool gaussian_valid(const Gaussian& g, double psd_tol = 1e-9);

// sqrt((z - z_pred)^T S^-1 (z - z_pred)) via Cholesky.
// Throws std::invalid_argument if S is not positive definite.
double mahalanobis(const VecX& z, const VecX& z_pred, const MatX& S);

// log N(innovation; 0, S). Same PD requirement as mahalanobis().
double gaussian_log_likelihood(const VecX& innovation, const MatX& S);

}  // namespace handkin
