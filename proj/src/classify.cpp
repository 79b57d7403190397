#include "pseudobench/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>

#include "pseudobench/errors.hpp"
#include "pseudobench/features.hpp"

namespace pseudobench {

WindowSet select(const WindowSet& set, const std::vector<std::size_t>& indices) {
  WindowSet out;
  out.window_len_samples = set.window_len_samples;
  out.step_samples = set.step_samples;
  out.sample_rate_hz = set.sample_rate_hz;
  out.windows.reserve(indices.size());
  std::set<std::string> distinct;
  for (std::size_t i : indices) {
    out.windows.push_back(set.windows.at(i));
    out.labels.push_back(set.labels[i]);
    out.onsets.push_back(set.onsets[i]);
    out.session_ids.push_back(set.session_ids[i]);
    distinct.insert(set.labels[i]);
  }
  out.class_names.assign(distinct.begin(), distinct.end());
  return out;
}

BandedWindows BandedWindows::select(const std::vector<std::size_t>& indices) const {
  BandedWindows out;
  out.bands.reserve(bands.size());
  for (const WindowSet& b : bands) out.bands.push_back(pseudobench::select(b, indices));
  return out;
}

void MdmClassifier::fit(const WindowSet& train) {
  if (train.windows.empty()) throw parameter_error("mdm: empty training set");
  classes_ = train.class_names;
  means_.clear();
  for (const std::string& cls : classes_) {
    std::vector<SpdMatrix> covs;
    for (std::size_t i = 0; i < train.size(); ++i)
      if (train.labels[i] == cls) covs.push_back(sample_covariance(train.windows[i]));
    if (covs.empty()) throw parameter_error("mdm: class without training windows: " + cls);
    means_.push_back(riemannian_mean(covs));
  }
}

std::string MdmClassifier::predict(const Eigen::Ref<const Eigen::MatrixXd>& window) const {
  if (classes_.empty()) throw parameter_error("mdm: predict before fit");
  const SpdMatrix cov = sample_covariance(window);
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < means_.size(); ++k) {
    const double d = riemannian_distance(cov, means_[k]);
    if (d < best_dist) {
      best_dist = d;
      best = k;
    }
  }
  return classes_[best];
}

void ShrinkageLda::fit(const Eigen::Ref<const Eigen::MatrixXd>& features,
                       const std::vector<std::string>& labels, double gamma) {
  const Eigen::Index n = features.rows();
  const Eigen::Index p = features.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw parameter_error("lda: features/labels size mismatch");
  if (p < 1) throw parameter_error("lda: empty feature vectors");
  if (gamma < 0.0 || gamma > 1.0) throw parameter_error("lda: gamma must lie in [0, 1]");

  std::set<std::string> distinct(labels.begin(), labels.end());
  classes_.assign(distinct.begin(), distinct.end());
  const Eigen::Index k = static_cast<Eigen::Index>(classes_.size());
  if (n <= k) throw parameter_error("lda: need more samples than classes");

  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, p);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
  std::map<std::string, Eigen::Index> index;
  for (Eigen::Index c = 0; c < k; ++c) index[classes_[c]] = c;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index c = index[labels[i]];
    means.row(c) += features.row(i);
    counts[c] += 1.0;
  }
  for (Eigen::Index c = 0; c < k; ++c) means.row(c) /= counts[c];

  // Pooled within-class covariance, n - K denominator.
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd d = features.row(i) - means.row(index[labels[i]]);
    pooled.noalias() += d * d.transpose();
  }
  pooled /= static_cast<double>(n - k);

  Eigen::MatrixXd shrunk = (1.0 - gamma) * pooled;
  shrunk.diagonal().array() += gamma * pooled.trace() / static_cast<double>(p);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(shrunk);
  if (es.info() != Eigen::Success) throw numeric_error("lda: eigensolver failed");
  const double max_eig = es.eigenvalues().maxCoeff();
  if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(max_eig, 0.0))
    throw numeric_error("lda: singular shrunk covariance (increase gamma)");
  const Eigen::MatrixXd sigma_inv = es.eigenvectors() *
                                    es.eigenvalues().array().inverse().matrix().asDiagonal() *
                                    es.eigenvectors().transpose();

  coef_ = means * sigma_inv;  // row k = mu_k^T Sigma^-1
  intercept_.resize(k);
  for (Eigen::Index c = 0; c < k; ++c)
    intercept_[c] = -0.5 * coef_.row(c).dot(means.row(c)) +
                    std::log(counts[c] / static_cast<double>(n));
}

std::string ShrinkageLda::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (classes_.empty()) throw parameter_error("lda: predict before fit");
  const Eigen::VectorXd scores = coef_ * x + intercept_;
  Eigen::Index best = 0;
  scores.maxCoeff(&best);
  return classes_[static_cast<std::size_t>(best)];
}

namespace {

double param_or(const ParamMap& params, const char* name, double fallback) {
  const auto it = params.find(name);
  return it == params.end() ? fallback : it->second;
}

int int_param_or(const ParamMap& params, const char* name, int fallback) {
  return static_cast<int>(std::llround(param_or(params, name, fallback)));
}

class MdmModel : public PipelineModel {
 public:
  void fit(const BandedWindows& train) override { clf_.fit(train.bands.front()); }
  std::vector<std::string> predict(const BandedWindows& data) const override {
    std::vector<std::string> out;
    out.reserve(data.size());
    for (const Eigen::MatrixXd& w : data.bands.front().windows) out.push_back(clf_.predict(w));
    return out;
  }

 private:
  MdmClassifier clf_;
};

// Covariance (optionally delay-embedded) -> tangent space at the Karcher mean
// of the training covariances -> shrinkage LDA.
class TangentLdaModel : public PipelineModel {
 public:
  TangentLdaModel(double gamma, AugConfig aug) : gamma_(gamma), aug_(aug) {}

  void fit(const BandedWindows& train) override {
    const WindowSet& set = train.bands.front();
    std::vector<SpdMatrix> covs;
    covs.reserve(set.size());
    for (const Eigen::MatrixXd& w : set.windows) covs.push_back(augmented_covariance(w, aug_));
    reference_.emplace(riemannian_mean(covs));

    Eigen::MatrixXd features(set.size(), covs.front().dim() * (covs.front().dim() + 1) / 2);
    for (std::size_t i = 0; i < covs.size(); ++i)
      features.row(static_cast<Eigen::Index>(i)) = tangent_space(covs[i], *reference_).transpose();
    lda_.fit(features, set.labels, gamma_);
  }

  std::vector<std::string> predict(const BandedWindows& data) const override {
    std::vector<std::string> out;
    out.reserve(data.size());
    for (const Eigen::MatrixXd& w : data.bands.front().windows)
      out.push_back(lda_.predict(tangent_space(augmented_covariance(w, aug_), *reference_)));
    return out;
  }

 private:
  double gamma_;
  AugConfig aug_;
  std::optional<SpdMatrix> reference_;
  ShrinkageLda lda_;
};

// Per-band CSP log-variance features, concatenated, into shrinkage LDA.
// With a single band this is plain CSP+LDA.
class CspLdaModel : public PipelineModel {
 public:
  explicit CspLdaModel(double gamma, int n_filters = 4) : gamma_(gamma), n_filters_(n_filters) {}

  void fit(const BandedWindows& train) override {
    filters_.clear();
    for (const WindowSet& band : train.bands) filters_.push_back(csp_fit(band, n_filters_));
    const WindowSet& first = train.bands.front();
    Eigen::MatrixXd features(first.size(), feature_dim());
    for (std::size_t i = 0; i < first.size(); ++i)
      features.row(static_cast<Eigen::Index>(i)) = features_for(train, i).transpose();
    lda_.fit(features, first.labels, gamma_);
  }

  std::vector<std::string> predict(const BandedWindows& data) const override {
    std::vector<std::string> out;
    out.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
      out.push_back(lda_.predict(features_for(data, i)));
    return out;
  }

 private:
  Eigen::Index feature_dim() const {
    Eigen::Index dim = 0;
    for (const CspFilters& f : filters_) dim += f.filters.rows();
    return dim;
  }

  Eigen::VectorXd features_for(const BandedWindows& data, std::size_t i) const {
    Eigen::VectorXd v(feature_dim());
    Eigen::Index at = 0;
    for (std::size_t b = 0; b < filters_.size(); ++b) {
      const Eigen::VectorXd f = csp_transform(filters_[b], data.bands[b].windows[i]);
      v.segment(at, f.size()) = f;
      at += f.size();
    }
    return v;
  }

  double gamma_;
  int n_filters_;
  std::vector<CspFilters> filters_;
  ShrinkageLda lda_;
};

class ArLdaModel : public PipelineModel {
 public:
  ArLdaModel(double gamma, int order) : gamma_(gamma), order_(order) {}

  void fit(const BandedWindows& train) override {
    const WindowSet& set = train.bands.front();
    const Eigen::Index dim = set.windows.front().rows() * order_;
    Eigen::MatrixXd features(set.size(), dim);
    for (std::size_t i = 0; i < set.size(); ++i)
      features.row(static_cast<Eigen::Index>(i)) =
          ar_features(set.windows[i], order_).transpose();
    lda_.fit(features, set.labels, gamma_);
  }

  std::vector<std::string> predict(const BandedWindows& data) const override {
    std::vector<std::string> out;
    out.reserve(data.size());
    for (const Eigen::MatrixXd& w : data.bands.front().windows)
      out.push_back(lda_.predict(ar_features(w, order_)));
    return out;
  }

 private:
  double gamma_;
  int order_;
  ShrinkageLda lda_;
};

const std::vector<double> kGammaGrid = {0.01, 0.1, 0.3, 0.5, 0.9};

}  // namespace

std::vector<ParamMap> expand_grid(const std::map<std::string, std::vector<double>>& grid) {
  std::vector<ParamMap> points;
  points.emplace_back();
  for (const auto& [name, values] : grid) {
    if (values.empty()) throw parameter_error("empty value list for grid parameter " + name);
    std::vector<ParamMap> expanded;
    expanded.reserve(points.size() * values.size());
    for (const ParamMap& base : points)
      for (double v : values) {
        ParamMap next = base;
        next[name] = v;
        expanded.push_back(std::move(next));
      }
    points = std::move(expanded);
  }
  return points;
}

GridSearchResult grid_search(const Pipeline& pipeline, const BandedWindows& train, int folds,
                             const std::function<double(const ConfusionMatrix&)>& scorer) {
  GridSearchResult result;
  if (pipeline.hyper_grid.empty()) return result;  // nothing to tune

  if (folds < 2) throw parameter_error("grid search needs at least two folds");
  const std::size_t n = train.size();
  if (n < static_cast<std::size_t>(folds)) throw parameter_error("fewer windows than folds");

  std::map<std::string, std::size_t> class_counts;
  for (const std::string& l : train.labels()) ++class_counts[l];
  for (const auto& [label, count] : class_counts)
    if (count < static_cast<std::size_t>(folds))
      throw validation_error("fold construction failed: class '" + label + "' has only " +
                             std::to_string(count) + " windows for " + std::to_string(folds) +
                             " folds");

  const auto score_fn = scorer ? scorer : [](const ConfusionMatrix& cm) { return nmcc(cm); };
  const std::vector<std::string>& all_classes = train.class_names();

  // Contiguous, time-ordered fold blocks, materialized once and reused for
  // every grid point.
  std::vector<std::pair<BandedWindows, BandedWindows>> fold_splits;  // train, validation
  for (int f = 0; f < folds; ++f) {
    const std::size_t begin = n * static_cast<std::size_t>(f) / static_cast<std::size_t>(folds);
    const std::size_t end =
        n * static_cast<std::size_t>(f + 1) / static_cast<std::size_t>(folds);
    std::vector<std::size_t> train_idx, val_idx;
    for (std::size_t i = 0; i < n; ++i)
      (i >= begin && i < end ? val_idx : train_idx).push_back(i);
    fold_splits.emplace_back(train.select(train_idx), train.select(val_idx));
  }

  double best = -std::numeric_limits<double>::infinity();
  for (const ParamMap& params : expand_grid(pipeline.hyper_grid)) {
    double total = 0.0;
    for (const auto& [fold_train, fold_val] : fold_splits) {
      auto model = pipeline.make(params);
      model->fit(fold_train);
      const auto predicted = model->predict(fold_val);
      total += score_fn(confusion(fold_val.labels(), predicted, all_classes));
    }
    const double mean_score = total / static_cast<double>(folds);
    result.evaluated.emplace_back(params, mean_score);
    if (mean_score > best) {
      best = mean_score;
      result.best_params = params;
      result.best_score = mean_score;
    }
  }
  return result;
}

std::vector<Pipeline> registry() {
  std::vector<Pipeline> list;

  list.push_back({"mdm", false, {}, [](const ParamMap&) -> std::unique_ptr<PipelineModel> {
                    return std::make_unique<MdmModel>();
                  }});

  list.push_back({"tang_lda",
                  false,
                  {{"gamma", kGammaGrid}},
                  [](const ParamMap& p) -> std::unique_ptr<PipelineModel> {
                    return std::make_unique<TangentLdaModel>(param_or(p, "gamma", 0.1),
                                                             AugConfig{1, 1});
                  }});

  // The embedding grid is a desk-scale subset of the full order/lag product;
  // larger grids are accurate but dominate benchmark runtime.
  list.push_back({"aug_tang_lda",
                  false,
                  {{"gamma", {0.1, 0.5}}, {"order", {1, 2, 3}}, {"lag", {1, 4}}},
                  [](const ParamMap& p) -> std::unique_ptr<PipelineModel> {
                    return std::make_unique<TangentLdaModel>(
                        param_or(p, "gamma", 0.1),
                        AugConfig{int_param_or(p, "order", 2), int_param_or(p, "lag", 1)});
                  }});

  list.push_back({"csp_lda",
                  false,
                  {{"gamma", kGammaGrid}},
                  [](const ParamMap& p) -> std::unique_ptr<PipelineModel> {
                    return std::make_unique<CspLdaModel>(param_or(p, "gamma", 0.1));
                  }});

  list.push_back({"fbcsp_lda",
                  true,
                  {{"gamma", kGammaGrid}},
                  [](const ParamMap& p) -> std::unique_ptr<PipelineModel> {
                    return std::make_unique<CspLdaModel>(param_or(p, "gamma", 0.1));
                  }});

  list.push_back({"ar_lda",
                  false,
                  {{"gamma", kGammaGrid}, {"order", {2, 4, 6}}},
                  [](const ParamMap& p) -> std::unique_ptr<PipelineModel> {
                    return std::make_unique<ArLdaModel>(param_or(p, "gamma", 0.1),
                                                        int_param_or(p, "order", 4));
                  }});
  return list;
}

const Pipeline& find_pipeline(const std::string& id) {
  static const std::vector<Pipeline> catalogue = registry();
  for (const Pipeline& p : catalogue)
    if (p.id == id) return p;
  throw parameter_error("unknown pipeline id: " + id);
}

}  // namespace pseudobench
