#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pseudobench/types.hpp"

namespace pseudobench {

// Band-pass specification. `order` is the order of the Butterworth low-pass
// prototype; the resulting band-pass has 2*order poles, realized as `order`
// cascaded biquad sections. The default (order 2) gives a 4th-order band-pass.
struct BandSpec {
  double low_hz = 8.0;
  double high_hz = 30.0;
  int order = 2;
};

// One second-order section, direct form II transposed:
//   H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct Biquad {
  double b0 = 0, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
};

// Bilinear-transform Butterworth band-pass design. Requires
// 0 < low < high < sample_rate / 2; unit gain at the geometric center.
std::vector<Biquad> design_bandpass(const BandSpec& band, double sample_rate_hz);

// Causal cascade filter, zero initial state: output at t depends only on
// inputs <= t.
Eigen::VectorXd sos_filter(const std::vector<Biquad>& sections,
                           const Eigen::Ref<const Eigen::VectorXd>& x);

// |H(e^{j 2 pi f / rate})| of the cascade; used to cross-check designs.
double sos_gain_at(const std::vector<Biquad>& sections, double freq_hz, double sample_rate_hz);

// Filter every channel of a recording; events, names and length are unchanged.
Recording bandpass(const Recording& rec, const BandSpec& band);

// One filtered recording per band, input order preserved.
std::vector<Recording> filter_bank(const Recording& rec, const std::vector<BandSpec>& bands);

// The six default non-overlapping bands: 8-12, 12-16, 16-20, 20-24, 24-28, 28-35 Hz.
std::vector<BandSpec> default_filter_bank();

// Per window and per channel: zero mean, unit standard deviation (population
// convention). Constant channels map to all-zeros.
WindowSet standardize_channels(const WindowSet& win);

}  // namespace pseudobench
