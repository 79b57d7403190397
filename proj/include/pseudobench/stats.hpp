#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pseudobench/types.hpp"

namespace pseudobench {

double normal_cdf(double z);
// Inverse of normal_cdf, accurate to near machine precision (rational
// approximation refined by one Newton step).
double normal_quantile(double p);

// One-tailed signed-rank p-value for H1: differences > 0, i.e.
// P(W+ >= observed) under the null. Zero differences are dropped; ties get
// midranks. n <= 25 uses the exact null distribution, larger n the normal
// approximation with tie correction and continuity correction. All-zero
// input is an error.
double wilcoxon_one_tailed(const std::vector<double>& diffs);

// The two routes behind wilcoxon_one_tailed, exposed so they can be
// cross-checked against each other.
double wilcoxon_exact_p(const std::vector<double>& diffs);
double wilcoxon_normal_p(const std::vector<double>& diffs);

// Standardized mean difference mean(a-b)/std(a-b) with sample (n-1) std.
// nullopt when the differences have zero spread.
std::optional<double> smd(const std::vector<double>& scores_a,
                          const std::vector<double>& scores_b);

struct PairComparison {
  std::string pipeline_a;
  std::string pipeline_b;
  int n = 0;  // paired subjects
  bool comparable = false;
  std::optional<double> smd;
  std::optional<double> p_one_tailed;
  bool significant = false;  // p < 0.05
};

// All ordered pipeline pairs of one dataset's records, paired on per-subject
// scores (each subject's nmcc averaged over sessions first). The diagonal and
// pairs without informative differences are marked incomparable.
struct ComparisonMatrix {
  std::vector<std::string> pipelines;
  std::vector<PairComparison> cells;  // row-major pipelines x pipelines

  const PairComparison& at(std::size_t row, std::size_t col) const {
    return cells[row * pipelines.size() + col];
  }
};

ComparisonMatrix comparison_matrix(const std::vector<EvalRecord>& records);

// Stouffer's weighted Z over per-dataset one-tailed p-values:
//   z = sum w_i z_i / sqrt(sum w_i^2),  z_i = Phi^-1(1 - p_i)
// with p clamped to [1e-12, 1 - 1e-12]. Callers weight by sqrt(n_subjects).
struct MetaResult {
  double z = 0.0;
  double p = 1.0;
};

MetaResult meta_combine(const std::vector<double>& p_values, const std::vector<double>& weights);

}  // namespace pseudobench
