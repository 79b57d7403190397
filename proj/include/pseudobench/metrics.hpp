#pragma once

#include <string>
#include <vector>

#include "pseudobench/types.hpp"

namespace pseudobench {

ConfusionMatrix confusion(const std::vector<std::string>& true_labels,
                          const std::vector<std::string>& predicted_labels,
                          const std::vector<std::string>& class_names);

// Matthews correlation coefficient, multiclass generalization
//   R = (c*s - sum_k t_k p_k) / sqrt((s^2 - sum_k p_k^2)(s^2 - sum_k t_k^2))
// with c = trace, s = total, t = row sums, p = column sums; reduces to the
// familiar binary formula at K = 2. A zero denominator (e.g. the
// majority-class predictor) scores 0, the coin-toss anchor.
double mcc(const ConfusionMatrix& cm);

// (mcc + 1) / 2, mapped to [0, 1]; 0.5 is chance level.
double nmcc(const ConfusionMatrix& cm);

// Cohen's kappa (p_o - p_e) / (1 - p_e); 0 when p_e = 1.
double kappa(const ConfusionMatrix& cm);

double accuracy(const ConfusionMatrix& cm);

// Mutual information in bits of the joint distribution counts/total,
// 0 log 0 = 0, clamped at >= 0.
double mutual_information_bits(const ConfusionMatrix& cm);

// Information transfer rate: MI * 60 / t_symbol, in bits per minute.
double itr_bits_per_minute(const ConfusionMatrix& cm, double t_symbol_seconds);

struct ScoreSet {
  double nmcc = 0.0;
  double accuracy = 0.0;
  double kappa = 0.0;
  double mutual_info_bits = 0.0;
  double itr_bits_per_min = 0.0;
  double t_symbol_seconds = 0.0;
};

ScoreSet score(const ConfusionMatrix& cm, double t_symbol_seconds);

}  // namespace pseudobench
