#include "pseudobench/types.hpp"

#include <cmath>

#include "pseudobench/errors.hpp"

namespace pseudobench {

void Recording::validate(bool allow_idle) const {
  if (samples.rows() < 1 || samples.cols() < 1)
    throw validation_error("recording must have at least one channel and one sample");
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
    throw validation_error("sample_rate_hz must be positive and finite");
  if (static_cast<Eigen::Index>(channel_names.size()) != samples.rows())
    throw validation_error("channel_names length does not match channel count");
  if (!samples.allFinite()) throw validation_error("samples contain non-finite values");

  const std::int64_t len = length();
  std::int64_t prev_end = -1;
  for (const EventSpan& ev : events) {
    if (ev.label.empty()) throw validation_error("event label is empty");
    if (!allow_idle && ev.label == kIdleLabel)
      throw validation_error(std::string("reserved label '") + kIdleLabel +
                             "' in raw cue annotations");
    if (ev.onset_sample < 0 || ev.duration_samples < 1)
      throw validation_error("event onset/duration out of range");
    if (ev.end_sample() > len) throw validation_error("event extends past end of recording");
    if (ev.onset_sample < prev_end) throw validation_error("events overlap or are unsorted");
    prev_end = ev.end_sample();
  }
}

const char* to_string(EvalMode m) {
  return m == EvalMode::pseudo_online ? "pseudo_online" : "offline";
}

const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::within_session: return "within_session";
    case Protocol::cross_session_nested: return "cross_session_nested";
    default: return "cross_session_flat";
  }
}

EvalMode eval_mode_from_string(const std::string& s) {
  if (s == "pseudo_online") return EvalMode::pseudo_online;
  if (s == "offline") return EvalMode::offline;
  throw parameter_error("unknown mode: " + s);
}

Protocol protocol_from_string(const std::string& s) {
  if (s == "within_session") return Protocol::within_session;
  if (s == "cross_session_nested") return Protocol::cross_session_nested;
  if (s == "cross_session_flat") return Protocol::cross_session_flat;
  throw parameter_error("unknown protocol: " + s);
}

}  // namespace pseudobench
