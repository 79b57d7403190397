#include "pseudobench/spd.hpp"

#include <cmath>

namespace pseudobench {

namespace {

constexpr double kConditioningEps = 1e-10;
constexpr double kSymmetryTol = 1e-10;

// Eigendecomposition with a positivity check shared by the SPD operations.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> decompose_spd(const Eigen::MatrixXd& m,
                                                             const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw numeric_error(std::string(what) + ": eigensolver failed");
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw numeric_error(std::string(what) + ": matrix is not positive definite");
  return es;
}

Eigen::MatrixXd apply_to_eigenvalues(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& es,
                                     const Eigen::ArrayXd& mapped) {
  return es.eigenvectors() * mapped.matrix().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

SpdMatrix::SpdMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() < 1) throw parameter_error("SPD matrix must be square");
  if (!m_.allFinite()) throw numeric_error("SPD matrix has non-finite entries");
  const double scale = m_.cwiseAbs().maxCoeff();
  const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * std::max(scale, 1e-300))
    throw numeric_error("matrix is not symmetric");
  m_ = 0.5 * (m_ + m_.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(m_);
  if (llt.info() != Eigen::Success) throw numeric_error("matrix is not positive definite");
}

namespace detail {

SpdMatrix conditioned_covariance(const Eigen::MatrixXd& window) {
  if (window.cols() < 2) throw parameter_error("covariance needs at least two samples");
  if (!window.allFinite()) throw numeric_error("window has non-finite samples");

  const Eigen::MatrixXd centered = window.colwise() - window.rowwise().mean();
  Eigen::MatrixXd cov =
      (centered * centered.transpose()) / static_cast<double>(window.cols() - 1);
  const double trace = cov.trace();
  if (!(trace > 0.0))
    throw numeric_error("covariance has zero trace (constant window)");
  cov.diagonal().array() += kConditioningEps * trace / static_cast<double>(cov.rows());
  return SpdMatrix(std::move(cov));
}

}  // namespace detail

Eigen::MatrixXd spd_logm(const SpdMatrix& s) {
  const auto es = decompose_spd(s.mat(), "logm");
  return apply_to_eigenvalues(es, es.eigenvalues().array().log());
}

SpdMatrix spd_expm(const Eigen::Ref<const Eigen::MatrixXd>& sym) {
  Eigen::MatrixXd symmetric = 0.5 * (sym + sym.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric);
  if (es.info() != Eigen::Success) throw numeric_error("expm: eigensolver failed");
  return SpdMatrix(apply_to_eigenvalues(es, es.eigenvalues().array().exp()));
}

double riemannian_distance(const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != b.dim()) throw parameter_error("dimension mismatch");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(b.mat(), a.mat(),
                                                               Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw numeric_error("distance: eigensolver failed");
  const Eigen::ArrayXd lg = es.eigenvalues().array().log();
  return std::sqrt((lg * lg).sum());
}

SpdMatrix riemannian_mean(const std::vector<SpdMatrix>& mats) {
  if (mats.empty()) throw parameter_error("mean of an empty set");
  const Eigen::Index d = mats.front().dim();
  for (const SpdMatrix& s : mats)
    if (s.dim() != d) throw parameter_error("dimension mismatch");
  if (mats.size() == 1) return mats.front();

  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
  for (const SpdMatrix& s : mats) g += s.mat();
  g /= static_cast<double>(mats.size());

  constexpr int kMaxIter = 50;
  constexpr double kTol = 1e-8;
  double residual = 0.0;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    const auto es = decompose_spd(g, "mean");
    const Eigen::MatrixXd g_half = apply_to_eigenvalues(es, es.eigenvalues().array().sqrt());
    const Eigen::MatrixXd g_inv_half =
        apply_to_eigenvalues(es, es.eigenvalues().array().rsqrt());

    Eigen::MatrixXd tangent = Eigen::MatrixXd::Zero(d, d);
    for (const SpdMatrix& s : mats) {
      Eigen::MatrixXd whitened = g_inv_half * s.mat() * g_inv_half;
      whitened = 0.5 * (whitened + whitened.transpose());
      tangent += spd_logm(SpdMatrix(std::move(whitened)));
    }
    tangent /= static_cast<double>(mats.size());

    residual = tangent.norm();
    if (residual < kTol) return SpdMatrix(g);
    g = g_half * spd_expm(tangent).mat() * g_half;
    g = 0.5 * (g + g.transpose());
  }
  throw convergence_error("Karcher mean did not converge", residual);
}

Eigen::VectorXd tangent_space(const SpdMatrix& s, const SpdMatrix& ref) {
  if (s.dim() != ref.dim()) throw parameter_error("dimension mismatch");
  const auto es = decompose_spd(ref.mat(), "tangent_space");
  const Eigen::MatrixXd inv_half = apply_to_eigenvalues(es, es.eigenvalues().array().rsqrt());
  Eigen::MatrixXd whitened = inv_half * s.mat() * inv_half;
  whitened = 0.5 * (whitened + whitened.transpose());
  const Eigen::MatrixXd lg = spd_logm(SpdMatrix(std::move(whitened)));

  const Eigen::Index d = lg.rows();
  Eigen::VectorXd v(d * (d + 1) / 2);
  const double sqrt2 = std::sqrt(2.0);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    v[k++] = lg(i, i);
    for (Eigen::Index j = i + 1; j < d; ++j) v[k++] = sqrt2 * lg(i, j);
  }
  return v;
}

}  // namespace pseudobench
