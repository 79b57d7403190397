#include "pseudobench/epoching.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pseudobench/errors.hpp"

namespace pseudobench {

std::int64_t window_len_samples(const WindowConfig& cfg, double sample_rate_hz) {
  if (!(cfg.window_seconds > 0.0)) throw parameter_error("window_seconds must be positive");
  if (!(sample_rate_hz > 0.0)) throw parameter_error("sample rate must be positive");
  const auto len = std::llround(cfg.window_seconds * sample_rate_hz);
  if (len < 1) throw parameter_error("window shorter than one sample");
  return len;
}

std::int64_t step_samples(const WindowConfig& cfg, double sample_rate_hz) {
  if (!(cfg.overlap_fraction >= 0.0) || !(cfg.overlap_fraction < 1.0))
    throw parameter_error("overlap_fraction must lie in [0, 1)");
  const auto len = window_len_samples(cfg, sample_rate_hz);
  return std::max<std::int64_t>(1, std::llround(static_cast<double>(len) *
                                                (1.0 - cfg.overlap_fraction)));
}

Recording inject_idle(const Recording& rec) {
  rec.validate();
  for (const EventSpan& ev : rec.events)
    if (ev.label == kIdleLabel)
      throw validation_error("recording already contains injected idle events");

  Recording out = rec;
  out.events.clear();
  const std::int64_t len = rec.length();
  std::int64_t cursor = 0;
  for (const EventSpan& cue : rec.events) {
    if (cue.onset_sample > cursor)
      out.events.push_back({cursor, cue.onset_sample - cursor, kIdleLabel});
    out.events.push_back(cue);
    cursor = cue.end_sample();
  }
  if (cursor < len) out.events.push_back({cursor, len - cursor, kIdleLabel});
  return out;
}

namespace {

// Events must tile [0, L): sorted, adjacent, starting at 0 and ending at L.
void require_tiled(const std::vector<EventSpan>& events, std::int64_t len) {
  std::int64_t cursor = 0;
  for (const EventSpan& ev : events) {
    if (ev.onset_sample != cursor)
      throw validation_error("events do not tile the recording (gap or overlap at sample " +
                             std::to_string(cursor) + ")");
    cursor = ev.end_sample();
  }
  if (cursor != len) throw validation_error("events do not cover the end of the recording");
}

std::vector<std::string> sorted_distinct(const std::vector<std::string>& labels) {
  std::set<std::string> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

}  // namespace

WindowLabelDecision label_window_decision(std::int64_t onset, std::int64_t len,
                                          const std::vector<EventSpan>& tiled_events) {
  if (len < 1) throw parameter_error("window length must be >= 1");

  // First event whose end lies past the window start.
  auto it = std::upper_bound(tiled_events.begin(), tiled_events.end(), onset,
                             [](std::int64_t o, const EventSpan& ev) { return o < ev.end_sample(); });
  if (it == tiled_events.end() || it->onset_sample > onset)
    throw validation_error("window start not covered by events");

  WindowLabelDecision decision;
  const std::int64_t wend = onset + len;
  const EventSpan& first = *it;
  if (first.end_sample() >= wend) {
    decision.label = first.label;
    return decision;
  }

  auto next = std::next(it);
  if (next == tiled_events.end())
    throw validation_error("window extends past the tiled events");
  const EventSpan& second = *next;
  if (second.end_sample() < wend)
    throw parameter_error("window spans more than two events; shorten the window or the step");

  const std::int64_t a = first.end_sample() - onset;  // samples inside the first event
  const std::int64_t b = wend - first.end_sample();   // samples inside the second
  decision.events_spanned = 2;
  decision.tie = a == b;
  decision.kept_first = a > b;
  decision.label = a > b ? first.label : second.label;
  return decision;
}

std::string label_mixed_window(std::int64_t onset, std::int64_t len,
                               const std::vector<EventSpan>& tiled_events) {
  return label_window_decision(onset, len, tiled_events).label;
}

WindowSet slide_windows(const Recording& rec, const WindowConfig& cfg) {
  rec.validate(/*allow_idle=*/true);
  require_tiled(rec.events, rec.length());

  const std::int64_t len = window_len_samples(cfg, rec.sample_rate_hz);
  const std::int64_t step = step_samples(cfg, rec.sample_rate_hz);
  if (len > rec.length()) throw parameter_error("window longer than recording");

  WindowSet out;
  out.window_len_samples = len;
  out.step_samples = step;
  out.sample_rate_hz = rec.sample_rate_hz;
  const std::int64_t n = (rec.length() - len) / step + 1;
  out.windows.reserve(static_cast<std::size_t>(n));
  for (std::int64_t onset = 0; onset + len <= rec.length(); onset += step) {
    out.windows.emplace_back(rec.samples.middleCols(onset, len));
    out.labels.push_back(label_mixed_window(onset, len, rec.events));
    out.onsets.push_back(onset);
    out.session_ids.push_back(rec.session_id);
  }
  out.class_names = sorted_distinct(out.labels);
  return out;
}

OfflineEpochs epoch_offline(const Recording& rec, const WindowConfig& cfg) {
  rec.validate(/*allow_idle=*/true);
  const std::int64_t len = window_len_samples(cfg, rec.sample_rate_hz);

  OfflineEpochs out;
  out.windows.window_len_samples = len;
  out.windows.step_samples = len;
  out.windows.sample_rate_hz = rec.sample_rate_hz;
  for (const EventSpan& cue : rec.events) {
    if (cue.label == kIdleLabel) continue;  // only cues become epochs
    if (cue.duration_samples < len) {
      ++out.skipped_short_cues;
      continue;
    }
    out.windows.windows.emplace_back(rec.samples.middleCols(cue.onset_sample, len));
    out.windows.labels.push_back(cue.label);
    out.windows.onsets.push_back(cue.onset_sample);
    out.windows.session_ids.push_back(rec.session_id);
  }
  if (out.windows.windows.empty())
    throw validation_error("no cue long enough for the requested window");
  out.windows.class_names = sorted_distinct(out.windows.labels);
  return out;
}

}  // namespace pseudobench
