// Acceptance suite: one check per release criterion, one pass/fail line each.
// Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include "pseudobench/cli.hpp"
#include "pseudobench/container.hpp"
#include "pseudobench/epoching.hpp"
#include "pseudobench/errors.hpp"
#include "pseudobench/evaluation.hpp"
#include "pseudobench/features.hpp"
#include "pseudobench/metrics.hpp"
#include "pseudobench/spd.hpp"
#include "pseudobench/stats.hpp"
#include "pseudobench/synth.hpp"
#include "test_util.hpp"

using namespace pseudobench;
namespace fs = std::filesystem;

namespace {

struct check_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw check_failure(what);
}

ConfusionMatrix cm_from(const std::vector<std::vector<std::int64_t>>& rows) {
  ConfusionMatrix cm;
  const auto k = static_cast<Eigen::Index>(rows.size());
  cm.counts.resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) cm.counts(i, j) = rows[i][j];
  for (Eigen::Index i = 0; i < k; ++i) cm.class_names.push_back("c" + std::to_string(i));
  return cm;
}

double binary_mcc_formula(double tp, double fn, double fp, double tn) {
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom <= 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(denom);
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------

void criterion_metric_exactness() {
  const auto start = std::chrono::steady_clock::now();

  const auto anchor = cm_from({{3, 2}, {1, 4}});  // TN=3 FP=2 / FN=1 TP=4
  require(std::abs(mcc(anchor) - 10.0 / std::sqrt(600.0)) < 1e-12, "binary MCC anchor");

  testutil::Rng rng(101);
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::vector<std::int64_t>> rows =
        {{rng.below(40), rng.below(40)}, {rng.below(40), rng.below(40)}};
    if (rows[0][0] + rows[0][1] + rows[1][0] + rows[1][1] == 0) rows[0][0] = 1;
    const auto cm = cm_from(rows);
    const double expected = binary_mcc_formula(
        static_cast<double>(rows[1][1]), static_cast<double>(rows[1][0]),
        static_cast<double>(rows[0][1]), static_cast<double>(rows[0][0]));
    require(std::abs(mcc(cm) - expected) < 1e-12, "multiclass vs binary MCC mismatch");
  }

  require(nmcc(cm_from({{5, 5}, {5, 5}})) == 0.5, "nMCC at MCC=0 must be exactly 0.5");
  require(elapsed_s(start) < 1.0, "metric block exceeded 1 s");
}

void criterion_imbalance() {
  const auto cm = cm_from({{80, 0}, {20, 0}});  // majority-class predictor on 80/20
  require(accuracy(cm) == 0.8, "accuracy must be exactly 0.8");
  require(nmcc(cm) == 0.5, "nMCC must be exactly 0.5");
}

void criterion_itr_anchors() {
  const auto perfect4 = cm_from({{9, 0, 0, 0}, {0, 9, 0, 0}, {0, 0, 9, 0}, {0, 0, 0, 9}});
  require(std::abs(mutual_information_bits(perfect4) - 2.0) < 1e-12, "MI of perfect 4-class");
  require(std::abs(itr_bits_per_minute(perfect4, 1.0) - 120.0) < 1e-9, "ITR at T=1 s");
  require(std::abs(itr_bits_per_minute(perfect4, 2.0) - 60.0) < 1e-9, "ITR at T=2 s");
}

void criterion_windowing() {
  auto rec = testutil::make_recording(1, 2500, 250.0, {{0, 2500, "task"}});
  const WindowSet set = slide_windows(rec, WindowConfig{2.0, 0.5});
  require(set.size() == 9, "window count for L=2500 w=500 s=250");

  // mixed labels vs per-sample majority with ties to the later event
  const std::int64_t w = 16;
  std::int64_t mismatches = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    testutil::Rng rng(seed);
    std::vector<EventSpan> events;
    const std::int64_t length = 300;
    std::int64_t cursor = 0;
    int idx = 0;
    while (cursor < length) {
      std::int64_t dur = w + rng.below(40);
      if (length - cursor < 2 * w) dur = length - cursor;
      dur = std::min(dur, length - cursor);
      events.push_back({cursor, dur, "e" + std::to_string(idx++ % 3)});
      cursor += dur;
    }
    std::vector<std::string> axis(static_cast<std::size_t>(length));
    for (const EventSpan& ev : events)
      for (std::int64_t t = ev.onset_sample; t < ev.end_sample(); ++t)
        axis[static_cast<std::size_t>(t)] = ev.label;

    for (std::int64_t onset = 0; onset + w <= length; onset += 5) {
      std::map<std::string, std::int64_t> tally;
      for (std::int64_t t = onset; t < onset + w; ++t)
        ++tally[axis[static_cast<std::size_t>(t)]];
      std::string expected;
      if (tally.size() == 1) {
        expected = tally.begin()->first;
      } else {
        const std::string first = axis[static_cast<std::size_t>(onset)];
        const std::string second = axis[static_cast<std::size_t>(onset + w - 1)];
        expected = tally[first] > tally[second] ? first : second;
      }
      if (label_mixed_window(onset, w, events) != expected) ++mismatches;
    }
  }
  require(mismatches == 0, "mixed-window labels disagree with the per-sample oracle");

  const std::vector<EventSpan> tie = {{0, 50, "old"}, {50, 100, "new"}};
  require(label_mixed_window(0, 100, tie) == "new", "50/50 tie must take the later event");
}

void criterion_idle_injection() {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    testutil::Rng rng(seed);
    const std::int64_t length = 150 + rng.below(850);
    std::vector<EventSpan> cues;
    std::int64_t cursor = rng.below(50);
    while (cursor + 5 < length) {
      const std::int64_t dur = 3 + rng.below(60);
      if (cursor + dur > length) break;
      cues.push_back({cursor, dur, "task"});
      cursor += dur + rng.below(70);
    }
    auto rec = testutil::make_recording(1, length, 100.0, cues, seed);
    const Recording out = inject_idle(rec);

    std::vector<int> coverage(static_cast<std::size_t>(length), 0);
    for (const EventSpan& ev : out.events)
      for (std::int64_t t = ev.onset_sample; t < ev.end_sample(); ++t)
        ++coverage[static_cast<std::size_t>(t)];
    for (std::int64_t t = 0; t < length; ++t)
      require(coverage[static_cast<std::size_t>(t)] == 1,
              "sample " + std::to_string(t) + " covered " +
                  std::to_string(coverage[static_cast<std::size_t>(t)]) + " times");
  }
}

void criterion_spd_suite() {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    testutil::Rng rng(seed + 500);
    const Eigen::MatrixXd s = rng.spd_matrix(5);
    const Eigen::MatrixXd back = spd_expm(spd_logm(SpdMatrix(s))).mat();
    require((back - s).norm() < 1e-9 * s.norm(), "expm(logm(S)) != S");
  }

  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    testutil::Rng rng(seed + 600);
    const SpdMatrix a(rng.spd_matrix(4));
    const SpdMatrix b(rng.spd_matrix(4));
    const Eigen::MatrixXd c =
        rng.gaussian_matrix(4, 4) + 2.0 * Eigen::MatrixXd::Identity(4, 4);
    const double base = riemannian_distance(a, b);
    const double congruent = riemannian_distance(SpdMatrix(c * a.mat() * c.transpose()),
                                                 SpdMatrix(c * b.mat() * c.transpose()));
    require(std::abs(base - congruent) < 1e-8 * std::max(1.0, base),
            "distance congruence invariance");
  }

  const SpdMatrix i2(Eigen::MatrixXd::Identity(2, 2));
  const SpdMatrix e2(Eigen::MatrixXd::Identity(2, 2) * std::exp(2.0));
  const Eigen::MatrixXd geometric = Eigen::MatrixXd::Identity(2, 2) * std::exp(1.0);
  require((riemannian_mean({i2, e2}).mat() - geometric).norm() < 1e-9,
          "Karcher mean of commuting diagonals");

  testutil::Rng rng(700);
  std::vector<SpdMatrix> mats;
  for (int i = 0; i < 6; ++i) mats.emplace_back(rng.spd_matrix(4));
  std::vector<SpdMatrix> reversed(mats.rbegin(), mats.rend());
  require((riemannian_mean(mats).mat() - riemannian_mean(reversed).mat()).norm() < 1e-8,
          "mean permutation invariance");
}

void criterion_csp_recovery() {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    testutil::Rng rng(seed + 900);
    Eigen::VectorXd u = rng.gaussian_matrix(8, 1);
    u.normalize();

    std::vector<Eigen::MatrixXd> windows;
    std::vector<std::string> labels;
    const double gain = std::sqrt(10.0) - 1.0;
    for (int i = 0; i < 80; ++i) {
      Eigen::MatrixXd base = rng.gaussian_matrix(8, 256);
      windows.push_back(base + gain * u * (u.transpose() * base));
      labels.push_back("boosted");
      windows.push_back(rng.gaussian_matrix(8, 256));
      labels.push_back("rest");
    }
    const CspFilters csp = csp_fit(testutil::make_window_set(windows, labels), 4);

    Eigen::Index lead = 0;
    double spread = -1.0;
    for (Eigen::Index i = 0; i < csp.eigenvalues.size(); ++i)
      if (std::abs(csp.eigenvalues[i] - 0.5) > spread) {
        spread = std::abs(csp.eigenvalues[i] - 0.5);
        lead = i;
      }
    const Eigen::VectorXd pattern = csp.patterns.row(lead).transpose();
    const double corr = std::abs(pattern.dot(u)) / (pattern.norm() * u.norm());
    require(corr >= 0.95,
            "seed " + std::to_string(seed) + ": |corr| = " + std::to_string(corr));
  }
}

SynthSpec acceptance_synth_spec() {
  SynthSpec spec;
  spec.n_subjects = 2;
  spec.n_sessions = 1;
  spec.n_channels = 8;
  spec.n_trials_per_class = 40;
  spec.classes = {"left_hand", "right_hand"};
  spec.sample_rate_hz = 128.0;
  spec.trial_seconds = 4.0;
  spec.gap_seconds = 3.0;
  spec.separability = 5.0;
  spec.seed = 2024;
  return spec;
}

EvalConfig acceptance_eval_config() {
  EvalConfig cfg;
  cfg.mode = EvalMode::pseudo_online;
  cfg.protocol = ProtocolKind::within_session;
  cfg.window = WindowConfig{2.0, 0.5};
  cfg.band = BandSpec{8.0, 30.0, 2};
  cfg.inner_folds = 5;
  return cfg;
}

void criterion_end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  const Dataset ds{"acceptance", generate(acceptance_synth_spec())};
  const int jobs = std::max(2u, std::thread::hardware_concurrency());

  const BenchmarkResult result = run_benchmark({ds}, registry(), acceptance_eval_config(), jobs);
  require(result.skips.empty(), "registry run produced skips");

  std::map<std::string, double> worst;
  for (const EvalRecord& r : result.records) {
    const auto it = worst.find(r.pipeline_id);
    if (it == worst.end() || r.nmcc < it->second) worst[r.pipeline_id] = r.nmcc;
  }
  require(worst.size() == registry().size(), "missing pipeline records");
  require(worst.at("mdm") >= 0.85,
          "mdm nMCC " + std::to_string(worst.at("mdm")) + " < 0.85");
  require(worst.at("csp_lda") >= 0.85,
          "csp_lda nMCC " + std::to_string(worst.at("csp_lda")) + " < 0.85");

  // null dataset: no class structure, enough test windows for a tight chance band
  SynthSpec null_spec = acceptance_synth_spec();
  null_spec.n_subjects = 1;
  null_spec.separability = 0.0;
  null_spec.n_trials_per_class = 72;
  const Dataset null_ds{"null", generate(null_spec)};
  const std::vector<Pipeline> named = {find_pipeline("mdm"), find_pipeline("csp_lda")};
  const BenchmarkResult null_result =
      run_benchmark({null_ds}, named, acceptance_eval_config(), jobs);
  for (const EvalRecord& r : null_result.records) {
    require(r.n_test >= 200, "null run has fewer than 200 test windows");
    require(std::abs(r.nmcc - 0.5) <= 0.07,
            r.pipeline_id + " null nMCC " + std::to_string(r.nmcc) + " outside 0.5 +/- 0.07");
  }

  require(elapsed_s(start) < 300.0, "full registry run exceeded 5 minutes");
}

void criterion_protocol_audits() {
  SynthSpec spec = acceptance_synth_spec();
  spec.n_subjects = 1;
  spec.n_trials_per_class = 10;
  const Dataset ds{"audit", generate(spec)};
  const std::vector<Pipeline> pipelines = {find_pipeline("mdm"), find_pipeline("csp_lda")};
  EvalConfig cfg = acceptance_eval_config();

  const BenchmarkResult a = run_benchmark({ds}, pipelines, cfg, 1);
  require(!a.records.empty(), "no records");
  for (const EvalOutcome& o : a.outcomes)
    if (o.record)
      require(o.audit.max_train_onset < o.audit.min_test_onset,
              "train window at or after a test window");

  // cross-session: folds never share sessions
  SynthSpec cross_spec = spec;
  cross_spec.n_sessions = 3;
  cross_spec.drift = 0.2;
  const Dataset cross_ds{"audit_cross", generate(cross_spec)};
  EvalConfig cross_cfg = cfg;
  cross_cfg.protocol = ProtocolKind::cross_session;
  const BenchmarkResult c = run_benchmark({cross_ds}, pipelines, cross_cfg, 1);
  require(!c.records.empty(), "no cross-session records");
  for (const EvalOutcome& o : c.outcomes) {
    if (!o.record) continue;
    std::set<std::string> train(o.audit.train_sessions.begin(), o.audit.train_sessions.end());
    for (const std::string& t : o.audit.test_sessions)
      require(train.count(t) == 0, "session shared between train and test");
  }

  // reruns with the identical seed are bit-identical
  const BenchmarkResult b = run_benchmark({ds}, pipelines, cfg, 2);
  require(a.records.size() == b.records.size(), "record count changed between reruns");
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const EvalRecord& x = a.records[i];
    const EvalRecord& y = b.records[i];
    require(x.pipeline_id == y.pipeline_id && x.subject_id == y.subject_id &&
                x.session_id == y.session_id,
            "record identity changed between reruns");
    require(std::memcmp(&x.nmcc, &y.nmcc, sizeof(double)) == 0 &&
                std::memcmp(&x.accuracy, &y.accuracy, sizeof(double)) == 0 &&
                std::memcmp(&x.kappa, &y.kappa, sizeof(double)) == 0 &&
                std::memcmp(&x.itr_bits_per_min, &y.itr_bits_per_min, sizeof(double)) == 0,
            "scores differ bitwise between reruns");
  }
}

void criterion_statistics() {
  require(wilcoxon_one_tailed({0.1, 0.2, 0.3, 0.4, 0.5}) == 0.03125,
          "exact n=5 all-positive p");

  std::vector<double> sweep;
  for (int i = 1; i <= 9; ++i) sweep.push_back(0.01 * i);
  require(wilcoxon_one_tailed(sweep) == std::pow(2.0, -9.0), "9-subject clean sweep p");

  testutil::Rng rng(1234);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> diffs;
    for (int i = 0; i < 12; ++i) diffs.push_back(rng.gaussian() + 0.4);
    require(std::abs(wilcoxon_exact_p(diffs) - wilcoxon_normal_p(diffs)) < 0.02,
            "exact vs normal beyond 0.02 at n=12");
  }

  for (double p : {0.009, 0.05, 0.31, 0.5, 0.93}) {
    const MetaResult meta = meta_combine({p}, {std::sqrt(9.0)});
    require(std::abs(meta.p - p) < 1e-9, "meta identity on p=" + std::to_string(p));
  }
}

void criterion_mode_contract() {
  SynthSpec spec = acceptance_synth_spec();
  spec.n_subjects = 1;
  spec.n_trials_per_class = 8;
  const auto recordings = generate(spec);
  const EvalConfig cfg = acceptance_eval_config();

  const WindowSet pseudo = slide_windows(inject_idle(recordings[0]), cfg.window);
  const WindowSet offline = epoch_offline(recordings[0], cfg.window).windows;
  std::set<std::string> pseudo_set(pseudo.class_names.begin(), pseudo.class_names.end());
  std::set<std::string> offline_set(offline.class_names.begin(), offline.class_names.end());
  for (const std::string& c : offline_set)
    require(pseudo_set.count(c) == 1, "offline class missing from pseudo-online set");
  require(pseudo_set.count(kIdleLabel) == 1, "pseudo-online set lacks the idle class");
  require(pseudo_set.size() == offline_set.size() + 1,
          "pseudo-online set must add exactly the idle class");

  // cmd_report joins both modes into one table
  const fs::path dir = fs::temp_directory_path() / "pseudobench_acceptance" / "modes";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream cfg_file(dir / "synth.json");
    cfg_file << "{\"dataset_id\":\"contract\",\"n_subjects\":1,\"n_sessions\":1,"
                "\"n_channels\":8,\"n_trials_per_class\":8,"
                "\"classes\":[\"left_hand\",\"right_hand\"],\"sample_rate_hz\":128.0,"
                "\"trial_seconds\":4.0,\"gap_seconds\":3.0,\"separability\":5.0,\"seed\":77}";
  }
  for (const char* mode : {"pseudo_online", "offline"}) {
    std::ofstream run_cfg(dir / (std::string(mode) + ".json"));
    run_cfg << "{\"synth\":" << [&] {
      std::ifstream in(dir / "synth.json");
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    }() << ",\"pipelines\":[\"mdm\",\"csp_lda\"],\"mode\":\"" << mode
            << "\",\"protocol\":\"within_session\",\"inner_folds\":5}";
    run_cfg.close();
    require(run_cli({"run", "--config", (dir / (std::string(mode) + ".json")).string(),
                     "--out", (dir / mode).string()}) == 0,
            std::string("cmd_run failed for mode ") + mode);
  }
  require(run_cli({"report", (dir / "pseudo_online/results.csv").string(),
                   (dir / "offline/results.csv").string(), "--out",
                   (dir / "report").string()}) == 0,
          "cmd_report failed");

  std::ifstream summary(dir / "report/summary.csv");
  std::string header, row;
  require(static_cast<bool>(std::getline(summary, header)), "summary.csv empty");
  require(header.find("pseudo_online_nmcc_mean") != std::string::npos &&
              header.find("offline_nmcc_mean") != std::string::npos,
          "summary header lacks both mode columns");
  bool joined = false;
  while (std::getline(summary, row)) {
    std::stringstream ss(row);
    std::vector<std::string> fields;
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() >= 8 && !fields[2].empty() && !fields[5].empty()) joined = true;
  }
  require(joined, "no row carries scores for both modes");
}

void criterion_container() {
  const fs::path dir = fs::temp_directory_path() / "pseudobench_acceptance" / "container";
  fs::remove_all(dir);
  fs::create_directories(dir);

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto rec = testutil::make_recording(1 + seed % 5, 16 + 3 * (seed % 9), 250.0,
                                        {{0, 4, "task"}}, seed);
    rec.samples = rec.samples.unaryExpr(
        [](double v) { return static_cast<double>(static_cast<float>(v)); });
    write_recording(rec, dir / "rt.json");

    std::ifstream p1(dir / "rt.f32", std::ios::binary);
    const std::string payload1((std::istreambuf_iterator<char>(p1)),
                               std::istreambuf_iterator<char>());
    const Recording back = read_recording(dir / "rt.json");
    require(back.samples == rec.samples, "matrix changed through the container");
    write_recording(back, dir / "rt2.json");
    std::ifstream p2(dir / "rt2.f32", std::ios::binary);
    const std::string payload2((std::istreambuf_iterator<char>(p2)),
                               std::istreambuf_iterator<char>());
    require(payload1 == payload2, "payload bytes changed through the container");
  }

  Recording one;
  one.subject_id = "S01";
  one.session_id = "sess01";
  one.sample_rate_hz = 100.0;
  one.channel_names = {"C1"};
  one.samples = Eigen::MatrixXd::Constant(1, 1, 1.0);
  write_recording(one, dir / "one.json");
  std::ifstream in(dir / "one.f32", std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  require(bytes.size() == 4, "payload of a 1x1 recording must be 4 bytes");
  require(static_cast<unsigned char>(bytes[0]) == 0x00 &&
              static_cast<unsigned char>(bytes[1]) == 0x00 &&
              static_cast<unsigned char>(bytes[2]) == 0x80 &&
              static_cast<unsigned char>(bytes[3]) == 0x3F,
          "1.0 must encode as 00 00 80 3F");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"1. metric exactness (binary/multiclass MCC, nMCC)", criterion_metric_exactness},
      {"2. imbalance demonstration (accuracy 0.8 vs nMCC 0.5)", criterion_imbalance},
      {"3. ITR anchors (2 bits; 120 and 60 bits/min)", criterion_itr_anchors},
      {"4. windowing arithmetic and mixed-label oracle", criterion_windowing},
      {"5. idle injection tiles the axis (200 layouts)", criterion_idle_injection},
      {"6. SPD suite (logm/expm, distance, Karcher mean)", criterion_spd_suite},
      {"7. CSP planted-direction recovery (10 seeds)", criterion_csp_recovery},
      {"8. end-to-end pseudo-online benchmark", criterion_end_to_end},
      {"9. protocol audits (causality, sessions, reruns)", criterion_protocol_audits},
      {"10. statistics (exact Wilcoxon, normal route, meta)", criterion_statistics},
      {"11. offline vs pseudo-online structural contract", criterion_mode_contract},
      {"12. container format (bit-exact round trip)", criterion_container},
  };

  int failures = 0;
  for (const auto& [name, body] : criteria) {
    try {
      body();
      std::cout << "[PASS] " << name << "\n";
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "[FAIL] " << name << ": " << e.what() << "\n";
    }
  }
  if (failures == 0)
    std::cout << "all " << criteria.size() << " acceptance criteria passed\n";
  else
    std::cout << failures << " of " << criteria.size() << " acceptance criteria failed\n";
  return failures == 0 ? 0 : 1;
}
