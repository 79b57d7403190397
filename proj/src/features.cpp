#include "pseudobench/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pseudobench/errors.hpp"
#include "pseudobench/spd.hpp"

namespace pseudobench {

namespace {

// Arithmetic mean of the per-window sample covariances of the given windows.
Eigen::MatrixXd mean_covariance(const WindowSet& set, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd acc =
      Eigen::MatrixXd::Zero(set.windows.front().rows(), set.windows.front().rows());
  for (std::size_t i : idx) acc += sample_covariance(set.windows[i]).mat();
  return acc / static_cast<double>(idx.size());
}

// Eigenvectors of S_num w = lambda (S_num + S_rest) w, n_half from each
// spectral extreme, interleaved top/bottom so row 0 is most extreme.
void append_extreme_filters(const Eigen::MatrixXd& s_num, const Eigen::MatrixXd& s_den,
                            int n_half, std::vector<Eigen::VectorXd>& filters,
                            std::vector<Eigen::VectorXd>& patterns,
                            std::vector<double>& eigenvalues) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(s_num, s_den);
  if (es.info() != Eigen::Success)
    throw numeric_error("csp_fit: generalized eigensolver failed (singular composite covariance)");
  const Eigen::Index d = s_num.rows();
  for (int j = 0; j < n_half; ++j) {
    for (Eigen::Index idx : {d - 1 - j, static_cast<Eigen::Index>(j)}) {
      filters.push_back(es.eigenvectors().col(idx));
      patterns.push_back(s_den * es.eigenvectors().col(idx));
      eigenvalues.push_back(es.eigenvalues()[idx]);
    }
  }
}

}  // namespace

CspFilters csp_fit(const WindowSet& train, int n_filters) {
  if (n_filters < 2 || n_filters % 2 != 0)
    throw parameter_error("n_filters must be a positive even number");
  if (train.windows.empty()) throw parameter_error("csp_fit: empty training set");
  const Eigen::Index channels = train.windows.front().rows();
  if (n_filters > channels)
    throw parameter_error("n_filters exceeds channel count");

  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < train.size(); ++i) by_class[train.labels[i]].push_back(i);
  if (by_class.size() < 2) throw parameter_error("csp_fit needs at least two classes");
  for (const auto& [label, idx] : by_class)
    if (idx.size() < 2)
      throw parameter_error("csp_fit: class '" + label + "' has fewer than two windows");

  std::vector<Eigen::VectorXd> filters, patterns;
  std::vector<double> eigenvalues;
  const int n_half = n_filters / 2;

  if (by_class.size() == 2) {
    auto it = by_class.begin();
    const Eigen::MatrixXd s1 = mean_covariance(train, it->second);
    const Eigen::MatrixXd s2 = mean_covariance(train, std::next(it)->second);
    append_extreme_filters(s1, s1 + s2, n_half, filters, patterns, eigenvalues);
  } else {
    std::vector<std::size_t> all(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) all[i] = i;
    const Eigen::MatrixXd s_all = mean_covariance(train, all);
    for (const auto& [label, idx] : by_class) {
      const Eigen::MatrixXd s_class = mean_covariance(train, idx);
      append_extreme_filters(s_class, s_all, n_half, filters, patterns, eigenvalues);
    }
  }

  CspFilters out;
  out.filters.resize(static_cast<Eigen::Index>(filters.size()), channels);
  out.patterns.resize(static_cast<Eigen::Index>(patterns.size()), channels);
  out.eigenvalues.resize(static_cast<Eigen::Index>(eigenvalues.size()));
  for (std::size_t i = 0; i < filters.size(); ++i) {
    out.filters.row(static_cast<Eigen::Index>(i)) = filters[i].transpose();
    out.patterns.row(static_cast<Eigen::Index>(i)) = patterns[i].transpose();
    out.eigenvalues[static_cast<Eigen::Index>(i)] = eigenvalues[i];
  }
  return out;
}

Eigen::VectorXd csp_transform(const CspFilters& filters,
                              const Eigen::Ref<const Eigen::MatrixXd>& window) {
  if (filters.filters.cols() != window.rows())
    throw parameter_error("filter/channel dimension mismatch");
  constexpr double kVarFloor = 1e-30;
  const Eigen::MatrixXd projected = filters.filters * window;
  Eigen::VectorXd features(projected.rows());
  for (Eigen::Index j = 0; j < projected.rows(); ++j) {
    const double mean = projected.row(j).mean();
    const double var = (projected.row(j).array() - mean).square().mean();
    features[j] = std::log(std::max(var, kVarFloor));
  }
  return features;
}

Eigen::VectorXd ar_features(const Eigen::Ref<const Eigen::MatrixXd>& window, int order) {
  if (order < 1) throw parameter_error("AR order must be >= 1");
  const Eigen::Index w = window.cols();
  if (w <= order + 1) throw parameter_error("window too short for the AR order");
  if (!window.allFinite()) throw numeric_error("window has non-finite samples");

  const Eigen::Index channels = window.rows();
  Eigen::VectorXd out(channels * order);
  for (Eigen::Index c = 0; c < channels; ++c) {
    const Eigen::ArrayXd x = window.row(c).array() - window.row(c).mean();

    // Biased autocorrelations r_0 .. r_p.
    Eigen::VectorXd r(order + 1);
    for (int k = 0; k <= order; ++k)
      r[k] = (x.head(w - k) * x.tail(w - k)).sum() / static_cast<double>(w);
    if (!(r[0] > 0.0)) throw numeric_error("ar_features: constant channel");

    Eigen::MatrixXd toeplitz(order, order);
    for (int i = 0; i < order; ++i)
      for (int j = 0; j < order; ++j) toeplitz(i, j) = r[std::abs(i - j)];
    toeplitz.diagonal().array() += 1e-12 * r[0];

    Eigen::LDLT<Eigen::MatrixXd> ldlt(toeplitz);
    if (ldlt.info() != Eigen::Success)
      throw numeric_error("ar_features: singular autocorrelation system");
    const Eigen::VectorXd coeffs = ldlt.solve(r.tail(order));
    if (!coeffs.allFinite()) throw numeric_error("ar_features: singular autocorrelation system");
    out.segment(c * order, order) = coeffs;
  }
  return out;
}

}  // namespace pseudobench
