#include "pseudobench/preprocess.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "pseudobench/errors.hpp"

namespace pseudobench {

namespace {

using cplx = std::complex<double>;

// Denominator coefficients of the biquad whose poles are z and conj(z).
void conjugate_pair_denominator(cplx z, Biquad& s) {
  s.a1 = -2.0 * z.real();
  s.a2 = std::norm(z);
}

// Denominator from two real poles.
void real_pair_denominator(double z1, double z2, Biquad& s) {
  s.a1 = -(z1 + z2);
  s.a2 = z1 * z2;
}

cplx bilinear(cplx s, double two_fs) { return (two_fs + s) / (two_fs - s); }

}  // namespace

std::vector<Biquad> design_bandpass(const BandSpec& band, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw parameter_error("sample rate must be positive");
  if (band.order < 1) throw parameter_error("filter order must be >= 1");
  if (!(band.low_hz > 0.0) || !(band.low_hz < band.high_hz) ||
      !(band.high_hz < sample_rate_hz / 2.0))
    throw parameter_error("band edges must satisfy 0 < low < high < Nyquist");

  const double fs = sample_rate_hz;
  const double two_fs = 2.0 * fs;
  const double pi = std::numbers::pi;

  // Prewarped analog edges, geometric center and bandwidth.
  const double w1 = two_fs * std::tan(pi * band.low_hz / fs);
  const double w2 = two_fs * std::tan(pi * band.high_hz / fs);
  const double w0sq = w1 * w2;
  const double bw = w2 - w1;

  const int n = band.order;
  std::vector<Biquad> sections;
  sections.reserve(static_cast<std::size_t>(n));

  // Low-pass prototype poles exp(j pi (2k + n + 1) / (2n)); each maps to two
  // band-pass poles, the roots of s^2 - p*bw*s + w0^2 = 0.
  auto bandpass_roots = [&](cplx p) {
    const cplx pb = p * bw;
    const cplx disc = std::sqrt(pb * pb - 4.0 * w0sq);
    return std::pair<cplx, cplx>{(pb + disc) / 2.0, (pb - disc) / 2.0};
  };

  for (int k = 0; k < n / 2; ++k) {
    const cplx p = std::polar(1.0, pi * (2.0 * k + n + 1.0) / (2.0 * n));
    const auto [s1, s2] = bandpass_roots(p);
    for (cplx s : {s1, s2}) {
      Biquad sec;
      conjugate_pair_denominator(bilinear(s, two_fs), sec);
      sections.push_back(sec);
    }
  }
  if (n % 2 == 1) {
    // Real prototype pole at -1: its two band-pass roots are each other's
    // conjugates, or both real for wide bands.
    const auto [s1, s2] = bandpass_roots(cplx(-1.0, 0.0));
    Biquad sec;
    const cplx z1 = bilinear(s1, two_fs);
    const cplx z2 = bilinear(s2, two_fs);
    if (std::abs(z1.imag()) > 1e-12)
      conjugate_pair_denominator(z1, sec);
    else
      real_pair_denominator(z1.real(), z2.real(), sec);
    sections.push_back(sec);
  }

  // Zeros: one at z=+1 and one at z=-1 per section, i.e. numerator 1 - z^-2.
  for (Biquad& sec : sections) {
    sec.b0 = 1.0;
    sec.b1 = 0.0;
    sec.b2 = -1.0;
  }

  // Normalize to unit gain at the geometric center frequency.
  const double f0 = std::sqrt(band.low_hz * band.high_hz);
  const double g = sos_gain_at(sections, f0, fs);
  if (!(g > 0.0) || !std::isfinite(g)) throw numeric_error("degenerate band-pass design");
  const double per_section = std::pow(1.0 / g, 1.0 / n);
  for (Biquad& sec : sections) {
    sec.b0 *= per_section;
    sec.b2 *= per_section;
  }
  return sections;
}

Eigen::VectorXd sos_filter(const std::vector<Biquad>& sections,
                           const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd y = x;
  for (const Biquad& s : sections) {
    double z1 = 0.0, z2 = 0.0;
    for (Eigen::Index t = 0; t < y.size(); ++t) {
      const double in = y[t];
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      y[t] = out;
    }
  }
  return y;
}

double sos_gain_at(const std::vector<Biquad>& sections, double freq_hz, double sample_rate_hz) {
  const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
  const cplx e1 = std::polar(1.0, -w);
  const cplx e2 = std::polar(1.0, -2.0 * w);
  cplx h = 1.0;
  for (const Biquad& s : sections)
    h *= (s.b0 + s.b1 * e1 + s.b2 * e2) / (1.0 + s.a1 * e1 + s.a2 * e2);
  return std::abs(h);
}

Recording bandpass(const Recording& rec, const BandSpec& band) {
  const auto sections = design_bandpass(band, rec.sample_rate_hz);
  Recording out = rec;
  for (Eigen::Index c = 0; c < rec.channels(); ++c)
    out.samples.row(c) = sos_filter(sections, rec.samples.row(c).transpose()).transpose();
  return out;
}

std::vector<Recording> filter_bank(const Recording& rec, const std::vector<BandSpec>& bands) {
  if (bands.empty()) throw parameter_error("filter bank needs at least one band");
  std::vector<Recording> out;
  out.reserve(bands.size());
  for (const BandSpec& band : bands) out.push_back(bandpass(rec, band));
  return out;
}

std::vector<BandSpec> default_filter_bank() {
  return {{8.0, 12.0, 2}, {12.0, 16.0, 2}, {16.0, 20.0, 2},
          {20.0, 24.0, 2}, {24.0, 28.0, 2}, {28.0, 35.0, 2}};
}

WindowSet standardize_channels(const WindowSet& win) {
  if (win.window_len_samples < 2)
    throw parameter_error("standardization needs at least two samples per window");
  WindowSet out = win;
  for (Eigen::MatrixXd& w : out.windows) {
    for (Eigen::Index c = 0; c < w.rows(); ++c) {
      const double mean = w.row(c).mean();
      const double var = (w.row(c).array() - mean).square().mean();
      if (var > 0.0)
        w.row(c) = (w.row(c).array() - mean) / std::sqrt(var);
      else
        w.row(c).setZero();
    }
  }
  return out;
}

}  // namespace pseudobench
