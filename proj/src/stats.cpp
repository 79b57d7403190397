#include "pseudobench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>

#include "pseudobench/errors.hpp"

namespace pseudobench {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) throw parameter_error("quantile requires p in (0, 1)");

  // Acklam's rational approximation, then one Newton step against the exact CDF.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;

  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  const double err = normal_cdf(x) - p;
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  if (pdf > 0.0) x -= err / pdf;
  return x;
}

namespace {

struct RankedDiffs {
  std::vector<double> ranks;        // midranks of |d|, aligned with signs
  std::vector<bool> positive;
  double w_plus = 0.0;
  std::size_t n = 0;
  std::map<double, int> tie_groups;  // |d| -> multiplicity
};

RankedDiffs rank_differences(const std::vector<double>& diffs) {
  RankedDiffs rd;
  std::vector<double> abs_vals;
  for (double d : diffs) {
    if (d == 0.0) continue;  // standard zero-drop convention
    abs_vals.push_back(std::abs(d));
    rd.positive.push_back(d > 0.0);
  }
  rd.n = abs_vals.size();
  if (rd.n == 0) throw validation_error("signed-rank test undefined: all differences are zero");

  std::vector<std::size_t> order(rd.n);
  for (std::size_t i = 0; i < rd.n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return abs_vals[i] < abs_vals[j]; });

  rd.ranks.resize(rd.n);
  std::size_t i = 0;
  while (i < rd.n) {
    std::size_t j = i;
    while (j + 1 < rd.n && abs_vals[order[j + 1]] == abs_vals[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) rd.ranks[order[k]] = midrank;
    rd.tie_groups[abs_vals[order[i]]] = static_cast<int>(j - i + 1);
    i = j + 1;
  }
  for (std::size_t k = 0; k < rd.n; ++k)
    if (rd.positive[k]) rd.w_plus += rd.ranks[k];
  return rd;
}

}  // namespace

double wilcoxon_exact_p(const std::vector<double>& diffs) {
  const RankedDiffs rd = rank_differences(diffs);
  const std::size_t n = rd.n;
  if (n > 25) throw parameter_error("exact signed-rank limited to n <= 25");

  // Count sign assignments by their doubled rank sum (midranks are halves,
  // so doubling keeps everything integral).
  std::vector<std::int64_t> doubled(n);
  std::int64_t max_sum = 0;
  for (std::size_t k = 0; k < n; ++k) {
    doubled[k] = std::llround(2.0 * rd.ranks[k]);
    max_sum += doubled[k];
  }
  std::vector<std::uint64_t> ways(static_cast<std::size_t>(max_sum) + 1, 0);
  ways[0] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::int64_t s = max_sum; s >= doubled[k]; --s)
      ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - doubled[k])];

  const std::int64_t observed = std::llround(2.0 * rd.w_plus);
  std::uint64_t at_least = 0;
  for (std::int64_t s = observed; s <= max_sum; ++s)
    at_least += ways[static_cast<std::size_t>(s)];
  return static_cast<double>(at_least) / std::ldexp(1.0, static_cast<int>(n));
}

double wilcoxon_normal_p(const std::vector<double>& diffs) {
  const RankedDiffs rd = rank_differences(diffs);
  const double n = static_cast<double>(rd.n);
  const double mean = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  for (const auto& [val, t] : rd.tie_groups) {
    const double td = static_cast<double>(t);
    var -= td * (td * td - 1.0) / 48.0;
  }
  if (!(var > 0.0)) throw numeric_error("signed-rank variance is zero (all ranks tied)");
  const double z = (rd.w_plus - mean - 0.5) / std::sqrt(var);
  // keep p a valid probability even when the tail underflows
  return std::max(1.0 - normal_cdf(z), 1e-300);
}

double wilcoxon_one_tailed(const std::vector<double>& diffs) {
  const RankedDiffs rd = rank_differences(diffs);
  return rd.n <= 25 ? wilcoxon_exact_p(diffs) : wilcoxon_normal_p(diffs);
}

std::optional<double> smd(const std::vector<double>& scores_a,
                          const std::vector<double>& scores_b) {
  if (scores_a.size() != scores_b.size()) throw parameter_error("paired lists differ in length");
  const std::size_t n = scores_a.size();
  if (n < 2) throw parameter_error("smd needs at least two pairs");

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += scores_a[i] - scores_b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = scores_a[i] - scores_b[i] - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) return std::nullopt;
  return mean / sd;
}

ComparisonMatrix comparison_matrix(const std::vector<EvalRecord>& records) {
  // Per-subject score = mean nmcc over that subject's sessions.
  std::map<std::string, std::map<std::string, std::pair<double, int>>> sums;  // pipeline -> subject
  for (const EvalRecord& r : records) {
    auto& cell = sums[r.pipeline_id][r.subject_id];
    cell.first += r.nmcc;
    cell.second += 1;
  }
  if (sums.size() < 2) throw validation_error("comparison needs at least two pipelines");

  ComparisonMatrix out;
  for (const auto& [pipeline, unused] : sums) out.pipelines.push_back(pipeline);
  const std::size_t k = out.pipelines.size();

  std::map<std::string, std::map<std::string, double>> score;
  for (const auto& [pipeline, subjects] : sums)
    for (const auto& [subject, cell] : subjects)
      score[pipeline][subject] = cell.first / cell.second;

  bool any_common = false;
  out.cells.resize(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      PairComparison& pc = out.cells[i * k + j];
      pc.pipeline_a = out.pipelines[i];
      pc.pipeline_b = out.pipelines[j];
      if (i == j) continue;

      std::vector<double> a, b;
      for (const auto& [subject, sa] : score[pc.pipeline_a]) {
        const auto& sb = score[pc.pipeline_b];
        const auto it = sb.find(subject);
        if (it == sb.end()) continue;
        a.push_back(sa);
        b.push_back(it->second);
      }
      pc.n = static_cast<int>(a.size());
      if (pc.n == 0) continue;
      any_common = true;

      std::vector<double> diffs(a.size());
      for (std::size_t t = 0; t < a.size(); ++t) diffs[t] = a[t] - b[t];
      const bool all_zero = std::all_of(diffs.begin(), diffs.end(),
                                        [](double d) { return d == 0.0; });
      if (all_zero) continue;  // undefined test, cell stays incomparable

      pc.comparable = true;
      pc.p_one_tailed = wilcoxon_one_tailed(diffs);
      if (pc.n >= 2) pc.smd = smd(a, b);
      pc.significant = *pc.p_one_tailed < 0.05;
    }
  }
  if (!any_common) throw validation_error("no pipeline pair shares a subject");
  return out;
}

MetaResult meta_combine(const std::vector<double>& p_values, const std::vector<double>& weights) {
  if (p_values.empty()) throw parameter_error("meta_combine needs at least one p-value");
  if (p_values.size() != weights.size())
    throw parameter_error("p-values and weights differ in length");

  double num = 0.0, wsq = 0.0;
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    if (!(weights[i] > 0.0)) throw parameter_error("weights must be positive");
    const double p = std::clamp(p_values[i], 1e-12, 1.0 - 1e-12);
    num += weights[i] * normal_quantile(1.0 - p);
    wsq += weights[i] * weights[i];
  }
  MetaResult r;
  r.z = num / std::sqrt(wsq);
  r.p = 1.0 - normal_cdf(r.z);
  return r;
}

}  // namespace pseudobench
