#include "pseudobench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "pseudobench/errors.hpp"

namespace pseudobench {

ConfusionMatrix confusion(const std::vector<std::string>& true_labels,
                          const std::vector<std::string>& predicted_labels,
                          const std::vector<std::string>& class_names) {
  if (true_labels.size() != predicted_labels.size())
    throw parameter_error("label lists differ in length");
  if (class_names.empty()) throw parameter_error("no classes");

  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t k = 0; k < class_names.size(); ++k)
    index[class_names[k]] = static_cast<Eigen::Index>(k);
  if (index.size() != class_names.size()) throw parameter_error("duplicate class names");

  ConfusionMatrix cm;
  cm.class_names = class_names;
  cm.counts.setZero(static_cast<Eigen::Index>(class_names.size()),
                    static_cast<Eigen::Index>(class_names.size()));
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    const auto ti = index.find(true_labels[i]);
    const auto pi = index.find(predicted_labels[i]);
    if (ti == index.end()) throw validation_error("unknown true label: " + true_labels[i]);
    if (pi == index.end()) throw validation_error("unknown predicted label: " + predicted_labels[i]);
    ++cm.counts(ti->second, pi->second);
  }
  return cm;
}

double mcc(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (total < 1) throw parameter_error("empty confusion matrix");

  const Eigen::Index k = cm.num_classes();
  const double s = static_cast<double>(total);
  const double c = static_cast<double>(cm.counts.trace());
  double tp_dot = 0.0, t_sq = 0.0, p_sq = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double t = static_cast<double>(cm.counts.row(i).sum());
    const double p = static_cast<double>(cm.counts.col(i).sum());
    tp_dot += t * p;
    t_sq += t * t;
    p_sq += p * p;
  }
  const double denom_sq = (s * s - p_sq) * (s * s - t_sq);
  if (denom_sq <= 0.0) return 0.0;
  return (c * s - tp_dot) / std::sqrt(denom_sq);
}

double nmcc(const ConfusionMatrix& cm) { return (mcc(cm) + 1.0) / 2.0; }

double kappa(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (total < 1) throw parameter_error("empty confusion matrix");
  const double s = static_cast<double>(total);
  const double p_o = static_cast<double>(cm.counts.trace()) / s;
  double p_e = 0.0;
  for (Eigen::Index i = 0; i < cm.num_classes(); ++i)
    p_e += static_cast<double>(cm.counts.row(i).sum()) *
           static_cast<double>(cm.counts.col(i).sum()) / (s * s);
  if (p_e >= 1.0) return 0.0;
  return (p_o - p_e) / (1.0 - p_e);
}

double accuracy(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (total < 1) throw parameter_error("empty confusion matrix");
  return static_cast<double>(cm.counts.trace()) / static_cast<double>(total);
}

double mutual_information_bits(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (total < 1) throw parameter_error("empty confusion matrix");
  const double s = static_cast<double>(total);
  const Eigen::Index k = cm.num_classes();

  Eigen::VectorXd pt(k), pp(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    pt[i] = static_cast<double>(cm.counts.row(i).sum()) / s;
    pp[i] = static_cast<double>(cm.counts.col(i).sum()) / s;
  }
  double mi = 0.0;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      if (cm.counts(i, j) == 0) continue;
      const double pij = static_cast<double>(cm.counts(i, j)) / s;
      mi += pij * std::log2(pij / (pt[i] * pp[j]));
    }
  return std::max(0.0, mi);
}

double itr_bits_per_minute(const ConfusionMatrix& cm, double t_symbol_seconds) {
  if (!(t_symbol_seconds > 0.0)) throw parameter_error("symbol time must be positive");
  return mutual_information_bits(cm) * 60.0 / t_symbol_seconds;
}

ScoreSet score(const ConfusionMatrix& cm, double t_symbol_seconds) {
  ScoreSet s;
  s.nmcc = nmcc(cm);
  s.accuracy = accuracy(cm);
  s.kappa = kappa(cm);
  s.mutual_info_bits = mutual_information_bits(cm);
  s.itr_bits_per_min = itr_bits_per_minute(cm, t_symbol_seconds);
  s.t_symbol_seconds = t_symbol_seconds;
  return s;
}

}  // namespace pseudobench
