#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pseudobench/metrics.hpp"
#include "pseudobench/spd.hpp"
#include "pseudobench/types.hpp"

namespace pseudobench {

// Index-selected subset of a window set; class_names are recomputed.
WindowSet select(const WindowSet& set, const std::vector<std::size_t>& indices);

// Aligned window sets, one per frequency band. Broadband pipelines see a
// single band; labels, onsets and session ids are shared across bands.
struct BandedWindows {
  std::vector<WindowSet> bands;

  std::size_t size() const { return bands.front().size(); }
  const std::vector<std::string>& labels() const { return bands.front().labels; }
  const std::vector<std::string>& class_names() const { return bands.front().class_names; }
  BandedWindows select(const std::vector<std::size_t>& indices) const;
};

// Minimum-distance-to-mean: one Karcher mean of sample covariances per class;
// prediction is the class of the nearest mean in the affine-invariant metric,
// ties broken by class-name order.
class MdmClassifier {
 public:
  void fit(const WindowSet& train);
  std::string predict(const Eigen::Ref<const Eigen::MatrixXd>& window) const;

  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<SpdMatrix>& class_means() const { return means_; }

 private:
  std::vector<std::string> classes_;
  std::vector<SpdMatrix> means_;
};

// LDA with the pooled covariance shrunk toward a scaled identity:
//   Sigma_g = (1 - gamma) Sigma_pooled + gamma (trace(Sigma_pooled)/p) I
//   delta_k(x) = x^T Sigma_g^-1 mu_k - 1/2 mu_k^T Sigma_g^-1 mu_k + log pi_k
class ShrinkageLda {
 public:
  void fit(const Eigen::Ref<const Eigen::MatrixXd>& features,
           const std::vector<std::string>& labels, double gamma);
  std::string predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  const std::vector<std::string>& classes() const { return classes_; }

 private:
  std::vector<std::string> classes_;
  Eigen::MatrixXd coef_;       // K x p rows Sigma^-1 mu_k
  Eigen::VectorXd intercept_;  // -1/2 mu_k^T Sigma^-1 mu_k + log pi_k
};

// A fitted decoding pipeline: feature extraction plus classifier head.
class PipelineModel {
 public:
  virtual ~PipelineModel() = default;
  virtual void fit(const BandedWindows& train) = 0;
  virtual std::vector<std::string> predict(const BandedWindows& data) const = 0;
};

using ParamMap = std::map<std::string, double>;

// Pipeline descriptor: stable id, hyperparameter grid, model factory.
struct Pipeline {
  std::string id;
  bool uses_filter_bank = false;
  std::map<std::string, std::vector<double>> hyper_grid;
  std::function<std::unique_ptr<PipelineModel>(const ParamMap&)> make;
};

// Cartesian expansion of a hyperparameter grid in deterministic order
// (keys alphabetical, last key cycling fastest). An empty grid expands to
// one empty ParamMap.
std::vector<ParamMap> expand_grid(const std::map<std::string, std::vector<double>>& grid);

struct GridSearchResult {
  ParamMap best_params;
  double best_score = 0.0;
  std::vector<std::pair<ParamMap, double>> evaluated;
};

// Hyperparameter selection on contiguous, time-ordered fold blocks of the
// training windows (no shuffling). Score = mean validation nMCC over folds;
// ties keep the first grid point. An empty grid returns defaults without
// fitting anything.
GridSearchResult grid_search(const Pipeline& pipeline, const BandedWindows& train, int folds,
                             const std::function<double(const ConfusionMatrix&)>& scorer = {});

// The built-in pipeline catalogue: mdm, tang_lda, aug_tang_lda, csp_lda,
// fbcsp_lda, ar_lda.
std::vector<Pipeline> registry();
const Pipeline& find_pipeline(const std::string& id);

}  // namespace pseudobench
