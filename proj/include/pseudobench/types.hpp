#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace pseudobench {

// Reserved label for uncued signal spans, injected by epoching::inject_idle.
inline constexpr const char* kIdleLabel = "nothing";

// Labeled interval on the sample axis. Half-open: [onset, onset + duration).
struct EventSpan {
  std::int64_t onset_sample = 0;
  std::int64_t duration_samples = 0;
  std::string label;

  std::int64_t end_sample() const { return onset_sample + duration_samples; }
};

// One continuous multichannel recording of one subject-session (or one run of it).
// samples is channels x length. Events are cue annotations; the reserved idle
// label only appears after inject_idle, never in stored raw recordings.
struct Recording {
  std::string subject_id;
  std::string session_id;
  double sample_rate_hz = 0.0;
  std::vector<std::string> channel_names;
  Eigen::MatrixXd samples;
  std::vector<EventSpan> events;

  Eigen::Index channels() const { return samples.rows(); }
  Eigen::Index length() const { return samples.cols(); }

  // Throws validation_error on any broken invariant: empty signal, bad rate,
  // non-finite samples, channel-name count mismatch, out-of-range / unsorted /
  // overlapping events, empty labels. allow_idle permits the reserved label
  // (true only for transformed, in-memory recordings).
  void validate(bool allow_idle = false) const;
};

// Windowed dataset: n windows of channels x window_len, each with a label,
// an onset (sample index of the window start) and a session id. Onsets
// strictly increase within a session.
struct WindowSet {
  std::vector<Eigen::MatrixXd> windows;
  std::vector<std::string> labels;
  std::vector<std::int64_t> onsets;
  std::vector<std::string> session_ids;
  std::vector<std::string> class_names;  // sorted distinct labels
  std::int64_t window_len_samples = 0;
  std::int64_t step_samples = 0;
  double sample_rate_hz = 0.0;

  std::size_t size() const { return windows.size(); }
};

// K x K count matrix, rows = true class, columns = predicted class.
struct ConfusionMatrix {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
  std::vector<std::string> class_names;

  Eigen::Index num_classes() const { return counts.rows(); }
  std::int64_t total() const { return counts.sum(); }
};

enum class EvalMode { pseudo_online, offline };
enum class Protocol { within_session, cross_session_nested, cross_session_flat };

const char* to_string(EvalMode m);
const char* to_string(Protocol p);
EvalMode eval_mode_from_string(const std::string& s);
Protocol protocol_from_string(const std::string& s);

// One scored (dataset, subject, session, pipeline, mode) row.
struct EvalRecord {
  std::string dataset_id;
  std::string subject_id;
  std::string session_id;
  std::string pipeline_id;
  EvalMode mode = EvalMode::pseudo_online;
  Protocol protocol = Protocol::within_session;
  double nmcc = 0.0;
  double accuracy = 0.0;
  double kappa = 0.0;
  double itr_bits_per_min = 0.0;
  std::int64_t n_train = 0;
  std::int64_t n_test = 0;
  double fit_seconds = 0.0;
  double score_seconds = 0.0;
};

}  // namespace pseudobench
