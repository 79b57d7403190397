#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pseudobench/classify.hpp"
#include "pseudobench/epoching.hpp"
#include "pseudobench/preprocess.hpp"
#include "pseudobench/types.hpp"

namespace pseudobench {

enum class ProtocolKind { within_session, cross_session };
enum class CvStyle { nested, flat };

struct EvalConfig {
  EvalMode mode = EvalMode::pseudo_online;
  ProtocolKind protocol = ProtocolKind::within_session;
  CvStyle cv_style = CvStyle::nested;
  double train_fraction = 0.8;
  int inner_folds = 5;
  WindowConfig window;
  BandSpec band;                                        // broadband pipelines
  std::vector<BandSpec> bank = default_filter_bank();   // filter-bank pipelines
  // Seconds per emitted decision for the ITR. Default: the window step
  // (pseudo-online emits one decision per step; offline windows are
  // back-to-back, so there it equals the window length).
  std::optional<double> t_symbol_seconds;
  std::int64_t seed = 0;
};

// Split audit trail kept alongside each record so protocol causality can be
// verified from the outside.
struct SplitAudit {
  std::int64_t max_train_onset = 0;
  std::int64_t min_test_onset = 0;
  std::vector<std::string> train_sessions;
  std::vector<std::string> test_sessions;
};

struct EvalOutcome {
  std::optional<EvalRecord> record;
  std::string skip_reason;  // set when record is absent
  SplitAudit audit;
};

// Causal within-session evaluation of one subject-session (possibly several
// runs): windows ordered by onset, train = first ceil(train_fraction * n),
// test = remainder, no shuffling; hyperparameters tuned by an inner k-fold
// grid search on the training part only.
EvalOutcome within_session(const std::vector<Recording>& session_runs, const Pipeline& pipeline,
                           const EvalConfig& cfg);

// Leave-one-session-out over all sessions of one subject. Nested style
// re-runs the grid search inside every training fold; flat style tunes once
// on all sessions concatenated and reuses the choice.
std::vector<EvalOutcome> cross_session(const std::vector<Recording>& subject_recordings,
                                       const Pipeline& pipeline, const EvalConfig& cfg);

struct Dataset {
  std::string id;
  std::vector<Recording> recordings;
};

struct SkipRecord {
  std::string dataset_id;
  std::string subject_id;
  std::string session_id;  // empty for cross-session skips spanning sessions
  std::string pipeline_id;
  std::string reason;
};

struct BenchmarkResult {
  std::vector<EvalRecord> records;
  std::vector<SkipRecord> skips;
  std::vector<EvalOutcome> outcomes;  // audit trail, same order as produced
};

// Cartesian sweep over (dataset, subject, [session], pipeline). Single tasks
// may fail and are recorded as skips; the sweep never aborts. Output order is
// deterministic and independent of the number of jobs.
BenchmarkResult run_benchmark(const std::vector<Dataset>& datasets,
                              const std::vector<Pipeline>& pipelines, const EvalConfig& cfg,
                              int jobs = 1);

}  // namespace pseudobench
