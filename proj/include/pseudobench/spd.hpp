#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pseudobench/errors.hpp"

namespace pseudobench {

// Symmetric positive-definite matrix. Construction checks symmetry
// (relative 1e-10), finiteness and positive definiteness.
class SpdMatrix {
 public:
  explicit SpdMatrix(Eigen::MatrixXd m);

  const Eigen::MatrixXd& mat() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Eigen::MatrixXd m_;
};

// Delay-embedding parameters for the augmented covariance: `order` delayed
// copies of the signal, `lag` samples apart.
struct AugConfig {
  int order = 1;
  int lag = 1;
};

namespace detail {
SpdMatrix conditioned_covariance(const Eigen::MatrixXd& window);
}

// Unbiased sample covariance of a row-mean-centered window (channels x
// samples), conditioned with eps * trace/dim * I (eps = 1e-10) so that
// rank-deficient windows still yield a positive-definite matrix.
template <typename Derived>
SpdMatrix sample_covariance(const Eigen::MatrixBase<Derived>& window) {
  return detail::conditioned_covariance(window.eval());
}

// Covariance of the delay-embedded window: rows are each channel at delays
// 0, lag, ..., (order-1)*lag, truncated to the common length
// w - (order-1)*lag. order = 1 reduces to sample_covariance exactly.
template <typename Derived>
SpdMatrix augmented_covariance(const Eigen::MatrixBase<Derived>& window, const AugConfig& cfg) {
  if (cfg.order < 1 || cfg.lag < 1) throw parameter_error("embedding order and lag must be >= 1");
  const Eigen::Index span = static_cast<Eigen::Index>(cfg.order - 1) * cfg.lag;
  if (span >= window.cols())
    throw parameter_error("delay embedding exceeds window length");
  if (cfg.order == 1) return sample_covariance(window);

  const Eigen::Index channels = window.rows();
  const Eigen::Index common = window.cols() - span;
  Eigen::MatrixXd stacked(channels * cfg.order, common);
  for (int k = 0; k < cfg.order; ++k)
    stacked.middleRows(k * channels, channels) =
        window.middleCols(static_cast<Eigen::Index>(k) * cfg.lag, common);
  return detail::conditioned_covariance(stacked);
}

// Principal matrix logarithm / exponential via eigendecomposition.
Eigen::MatrixXd spd_logm(const SpdMatrix& s);
SpdMatrix spd_expm(const Eigen::Ref<const Eigen::MatrixXd>& sym);

// Affine-invariant distance ||logm(A^-1/2 B A^-1/2)||_F, computed from the
// generalized eigenvalues of (B, A).
double riemannian_distance(const SpdMatrix& a, const SpdMatrix& b);

// Karcher mean by the fixed-point iteration
//   G <- G^1/2 expm(mean_i logm(G^-1/2 S_i G^-1/2)) G^1/2
// from the arithmetic mean, until the tangent mean drops below 1e-8
// (Frobenius) or 50 iterations, after which it is a convergence_error.
SpdMatrix riemannian_mean(const std::vector<SpdMatrix>& mats);

// Tangent-space coordinates of S at `ref`: the upper triangle of
// logm(ref^-1/2 S ref^-1/2), off-diagonal entries scaled by sqrt(2) so that
// ||v||_2 equals the Riemannian distance from ref.
Eigen::VectorXd tangent_space(const SpdMatrix& s, const SpdMatrix& ref);

}  // namespace pseudobench
