#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pseudobench/types.hpp"

namespace pseudobench {

// Spatial filters from the generalized eigenproblem on class-mean
// covariances. filters is rows x channels (one filter per row); patterns is
// the matching forward model, row i belonging to filter i. Rows are ordered
// most-discriminative first: eigenvector of the largest eigenvalue, then the
// per-class blocks alternate top/bottom extremes.
struct CspFilters {
  Eigen::MatrixXd filters;
  Eigen::MatrixXd patterns;
  Eigen::VectorXd eigenvalues;
};

// For two classes: solve S1 w = lambda (S1 + S2) w on the class-mean
// covariances and keep n_filters/2 eigenvectors from each spectral extreme.
// For K > 2, one-vs-rest: per class the eigenproblem of (S_class, S_all),
// n_filters/2 from each extreme, blocks concatenated in class-name order.
CspFilters csp_fit(const WindowSet& train, int n_filters = 4);

// Log-variance features of the spatially filtered window: f_j = log(var(w_j^T X))
// with population variance, floored at 1e-30 before the log.
Eigen::VectorXd csp_transform(const CspFilters& filters,
                              const Eigen::Ref<const Eigen::MatrixXd>& window);

// Per-channel autoregressive coefficients of order p, estimated from the
// Yule-Walker equations on the mean-centered channel using biased
// autocorrelations; concatenated channel-major into a vector of length C*p.
// Convention: x_t = a_1 x_{t-1} + ... + a_p x_{t-p} + e_t.
Eigen::VectorXd ar_features(const Eigen::Ref<const Eigen::MatrixXd>& window, int order);

}  // namespace pseudobench
