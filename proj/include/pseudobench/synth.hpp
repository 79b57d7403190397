#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pseudobench/types.hpp"

namespace pseudobench {

// Seeded generator of motor-imagery-like recordings with controllable class
// structure. Per class k the trial covariance is I + separability * u_k u_k^T
// with orthonormal directions u_k derived from the seed; inter-trial gaps
// carry baseline covariance I and become the idle class after injection.
// Sessions beyond the first rotate all class directions by exp(drift * A)
// with a seeded skew-symmetric A, modeling cross-session nonstationarity
// while keeping the covariances positive definite.
struct SynthSpec {
  int n_subjects = 1;
  int n_sessions = 1;
  int n_channels = 8;
  int n_trials_per_class = 20;
  std::vector<std::string> classes = {"left_hand", "right_hand"};
  double sample_rate_hz = 128.0;
  double trial_seconds = 4.0;
  double gap_seconds = 3.0;
  double separability = 5.0;
  double drift = 0.0;
  std::int64_t seed = 0;
};

// Fully deterministic in the seed: the same spec yields byte-identical
// recordings. Trial signals are 8-30 Hz colored noise shaped to the class
// covariance; trial order within a session is a seeded shuffle.
std::vector<Recording> generate(const SynthSpec& spec);

}  // namespace pseudobench
