#include "pseudobench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

#include "pseudobench/errors.hpp"
#include "pseudobench/preprocess.hpp"

namespace pseudobench {

namespace {

// mt19937_64 with hand-rolled transforms so streams are identical across
// standard libraries (std distributions are implementation-defined).
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : eng_(seed) {}

  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;  // [0, 1)
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t below(std::uint64_t n) {  // unbiased [0, n)
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = eng_();
    while (x >= limit) x = eng_();
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// splitmix64-style mixing for derived stream seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Eigen::MatrixXd gaussian_matrix(SeededRng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
  return m;
}

// Orthonormal class directions: Q factor of a seeded Gaussian matrix, signs
// fixed so the first coefficient of each column is non-negative.
Eigen::MatrixXd class_directions(std::uint64_t seed, Eigen::Index channels, Eigen::Index k) {
  SeededRng rng(mix_seed(seed, 0xd1c));
  const Eigen::MatrixXd g = gaussian_matrix(rng, channels, channels);
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  for (Eigen::Index c = 0; c < channels; ++c)
    if (q(0, c) < 0.0) q.col(c) = -q.col(c);
  return q.leftCols(k);
}

// exp of a skew-symmetric matrix via the Hermitian eigendecomposition of iA;
// the result is orthogonal.
Eigen::MatrixXd skew_exp(const Eigen::MatrixXd& skew) {
  using cd = std::complex<double>;
  const Eigen::MatrixXcd h = cd(0.0, 1.0) * skew.cast<cd>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success) throw numeric_error("skew_exp: eigensolver failed");
  Eigen::VectorXcd phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i)
    phases[i] = std::exp(cd(0.0, -es.eigenvalues()[i]));
  const Eigen::MatrixXcd e =
      es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  return e.real();
}

void validate(const SynthSpec& spec) {
  if (spec.n_subjects < 1 || spec.n_sessions < 1 || spec.n_channels < 1 ||
      spec.n_trials_per_class < 1)
    throw parameter_error("synth spec counts must be positive");
  if (spec.classes.empty()) throw parameter_error("synth spec needs at least one class");
  for (const std::string& c : spec.classes) {
    if (c.empty()) throw parameter_error("empty class name");
    if (c == kIdleLabel)
      throw parameter_error(std::string("class name '") + kIdleLabel + "' is reserved");
  }
  if (!(spec.sample_rate_hz > 0.0) || !(spec.trial_seconds > 0.0) || !(spec.gap_seconds > 0.0))
    throw parameter_error("synth spec rates and durations must be positive");
  if (spec.separability < 0.0 || spec.drift < 0.0)
    throw parameter_error("separability and drift must be non-negative");
}

}  // namespace

std::vector<Recording> generate(const SynthSpec& spec) {
  validate(spec);

  const auto channels = static_cast<Eigen::Index>(spec.n_channels);
  const auto k = static_cast<Eigen::Index>(spec.classes.size());
  const auto trial_len = std::max<std::int64_t>(2, std::llround(spec.trial_seconds * spec.sample_rate_hz));
  const auto gap_len = std::max<std::int64_t>(2, std::llround(spec.gap_seconds * spec.sample_rate_hz));
  const std::int64_t n_trials = static_cast<std::int64_t>(spec.n_trials_per_class) * k;
  const std::int64_t total_len = gap_len + n_trials * (trial_len + gap_len);

  const Eigen::MatrixXd directions =
      class_directions(static_cast<std::uint64_t>(spec.seed), channels, k);
  const auto coloring_sos = design_bandpass(BandSpec{8.0, 30.0, 2}, spec.sample_rate_hz);
  // sqrt(I + s uu^T) = I + (sqrt(1 + s) - 1) uu^T
  const double sqrt_gain = std::sqrt(1.0 + spec.separability) - 1.0;

  std::vector<Recording> recordings;
  for (int subj = 0; subj < spec.n_subjects; ++subj) {
    for (int sess = 0; sess < spec.n_sessions; ++sess) {
      // Sessions after the first rotate the class directions.
      Eigen::MatrixXd session_dirs = directions;
      if (sess > 0 && spec.drift > 0.0) {
        SeededRng drift_rng(mix_seed(static_cast<std::uint64_t>(spec.seed),
                                     0xd41f7 + 1000003ULL * subj + 7ULL * sess));
        Eigen::MatrixXd g = gaussian_matrix(drift_rng, channels, channels);
        const Eigen::MatrixXd skew = 0.5 * (g - g.transpose());
        session_dirs = skew_exp(spec.drift * skew) * directions;
      }

      SeededRng rng(mix_seed(static_cast<std::uint64_t>(spec.seed),
                             0x5e55 + 1000003ULL * subj + 7919ULL * sess));

      std::vector<Eigen::Index> trial_classes;
      for (Eigen::Index c = 0; c < k; ++c)
        for (int t = 0; t < spec.n_trials_per_class; ++t) trial_classes.push_back(c);
      rng.shuffle(trial_classes);

      Recording rec;
      char sid[32];
      std::snprintf(sid, sizeof sid, "S%02d", subj + 1);
      rec.subject_id = sid;
      std::snprintf(sid, sizeof sid, "sess%02d", sess + 1);
      rec.session_id = sid;
      rec.sample_rate_hz = spec.sample_rate_hz;
      for (Eigen::Index c = 0; c < channels; ++c) {
        std::snprintf(sid, sizeof sid, "C%02d", static_cast<int>(c) + 1);
        rec.channel_names.push_back(sid);
      }
      rec.samples.resize(channels, total_len);

      // Band-limited noise with unit per-channel variance, shaped per segment.
      auto fill_segment = [&](std::int64_t offset, std::int64_t len, const Eigen::VectorXd* dir) {
        Eigen::MatrixXd seg = gaussian_matrix(rng, channels, len);
        for (Eigen::Index c = 0; c < channels; ++c) {
          Eigen::VectorXd row = sos_filter(coloring_sos, seg.row(c).transpose());
          const double mean = row.mean();
          const double sd = std::sqrt((row.array() - mean).square().mean());
          if (sd > 0.0)
            seg.row(c) = ((row.array() - mean) / sd).matrix().transpose();
          else
            seg.row(c).setZero();
        }
        if (dir)
          seg += sqrt_gain * (*dir) * ((*dir).transpose() * seg);  // (I + g uu^T) seg
        rec.samples.middleCols(offset, len) = seg;
      };

      std::int64_t cursor = 0;
      fill_segment(cursor, gap_len, nullptr);
      cursor += gap_len;
      for (Eigen::Index cls : trial_classes) {
        const Eigen::VectorXd dir = session_dirs.col(cls);
        fill_segment(cursor, trial_len, &dir);
        rec.events.push_back({cursor, trial_len, spec.classes[static_cast<std::size_t>(cls)]});
        cursor += trial_len;
        fill_segment(cursor, gap_len, nullptr);
        cursor += gap_len;
      }

      rec.validate();
      recordings.push_back(std::move(rec));
    }
  }
  return recordings;
}

}  // namespace pseudobench
