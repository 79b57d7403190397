#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pseudobench/types.hpp"

namespace pseudobench {

// Sliding-window parameters. window_len = round(window_seconds * rate);
// step = round(window_len * (1 - overlap_fraction)), floored at 1.
struct WindowConfig {
  double window_seconds = 2.0;
  double overlap_fraction = 0.5;
};

std::int64_t window_len_samples(const WindowConfig& cfg, double sample_rate_hz);
std::int64_t step_samples(const WindowConfig& cfg, double sample_rate_hz);

// Adds "nothing" events covering exactly the complement of the cue intervals
// within [0, L). The returned event list tiles [0, L) with no gaps or
// overlaps. Rejects input that already contains the reserved label.
Recording inject_idle(const Recording& rec);

// Label for the window [onset, onset + len) against an event list that tiles
// the sample axis. A window may span at most two events; with a and b the
// fractions of the window inside the first and second event, a > b keeps the
// first event's label and a <= b takes the second's (ties go to the newer
// task). Spanning three or more events is an error.
std::string label_mixed_window(std::int64_t onset, std::int64_t len,
                               const std::vector<EventSpan>& tiled_events);

// Same decision with its context, for transformation reports.
struct WindowLabelDecision {
  std::string label;
  int events_spanned = 1;
  bool tie = false;         // a == b, resolved to the later event
  bool kept_first = true;   // a > b
};
WindowLabelDecision label_window_decision(std::int64_t onset, std::int64_t len,
                                          const std::vector<EventSpan>& tiled_events);

// Overlapping sliding windows over an idle-injected recording. Windows start
// at 0, step, 2*step, ... while onset + len <= L, so n = floor((L - len)/step) + 1;
// windows reaching past the end are dropped, never padded.
WindowSet slide_windows(const Recording& rec, const WindowConfig& cfg);

// Cue-locked epoching for synchronous evaluation: one window per cue, aligned
// at the cue onset. Cues shorter than the window are skipped and counted.
struct OfflineEpochs {
  WindowSet windows;
  std::int64_t skipped_short_cues = 0;
};
OfflineEpochs epoch_offline(const Recording& rec, const WindowConfig& cfg);

}  // namespace pseudobench
