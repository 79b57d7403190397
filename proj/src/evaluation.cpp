#include "pseudobench/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include "pseudobench/errors.hpp"
#include "pseudobench/metrics.hpp"

namespace pseudobench {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

void append_with_offset(WindowSet& dst, const WindowSet& src, std::int64_t onset_offset) {
  dst.windows.insert(dst.windows.end(), src.windows.begin(), src.windows.end());
  dst.labels.insert(dst.labels.end(), src.labels.begin(), src.labels.end());
  dst.session_ids.insert(dst.session_ids.end(), src.session_ids.begin(), src.session_ids.end());
  for (std::int64_t onset : src.onsets) dst.onsets.push_back(onset + onset_offset);
  dst.window_len_samples = src.window_len_samples;
  dst.step_samples = src.step_samples;
  dst.sample_rate_hz = src.sample_rate_hz;
}

void refresh_class_names(WindowSet& set) {
  std::set<std::string> distinct(set.labels.begin(), set.labels.end());
  set.class_names.assign(distinct.begin(), distinct.end());
}

// Windows for one session (one or more runs), one WindowSet per band. Run
// boundaries are respected: runs are windowed separately, then concatenated
// with onsets offset by the cumulative run length so time stays ordered.
BandedWindows prepare_banded(const std::vector<const Recording*>& session_runs,
                             const EvalConfig& cfg, bool use_bank) {
  if (session_runs.empty()) throw parameter_error("no recordings for session");
  const std::vector<BandSpec> bands = use_bank ? cfg.bank : std::vector<BandSpec>{cfg.band};

  BandedWindows out;
  out.bands.resize(bands.size());
  std::int64_t offset = 0;
  for (const Recording* run : session_runs) {
    for (std::size_t b = 0; b < bands.size(); ++b) {
      const Recording filtered = bandpass(*run, bands[b]);
      WindowSet ws;
      if (cfg.mode == EvalMode::pseudo_online)
        ws = slide_windows(inject_idle(filtered), cfg.window);
      else
        ws = epoch_offline(filtered, cfg.window).windows;
      append_with_offset(out.bands[b], ws, offset);
    }
    offset += run->length();
  }
  for (WindowSet& band : out.bands) refresh_class_names(band);
  return out;
}

std::size_t distinct_labels(const std::vector<std::string>& labels) {
  return std::set<std::string>(labels.begin(), labels.end()).size();
}

std::vector<std::string> union_classes(const BandedWindows& a, const BandedWindows& b) {
  std::set<std::string> u(a.class_names().begin(), a.class_names().end());
  u.insert(b.class_names().begin(), b.class_names().end());
  return {u.begin(), u.end()};
}

// Tune (or reuse `tuned`), fit, predict and score one train/test split.
EvalRecord fit_and_score(const Pipeline& pipeline, const BandedWindows& train,
                         const BandedWindows& test, const EvalConfig& cfg,
                         const ParamMap* tuned) {
  const auto fit_start = clock_type::now();
  ParamMap params;
  if (tuned)
    params = *tuned;
  else
    params = grid_search(pipeline, train, cfg.inner_folds).best_params;
  auto model = pipeline.make(params);
  model->fit(train);
  const double fit_seconds = seconds_since(fit_start);

  const auto score_start = clock_type::now();
  const auto predicted = model->predict(test);
  const ConfusionMatrix cm = confusion(test.labels(), predicted, union_classes(train, test));
  const WindowSet& ref_band = test.bands.front();
  const double t_symbol =
      cfg.t_symbol_seconds
          ? *cfg.t_symbol_seconds
          : static_cast<double>(ref_band.step_samples) / ref_band.sample_rate_hz;
  const ScoreSet scores = score(cm, t_symbol);
  const double score_seconds = seconds_since(score_start);

  EvalRecord rec;
  rec.pipeline_id = pipeline.id;
  rec.mode = cfg.mode;
  rec.nmcc = scores.nmcc;
  rec.accuracy = scores.accuracy;
  rec.kappa = scores.kappa;
  rec.itr_bits_per_min = scores.itr_bits_per_min;
  rec.n_train = static_cast<std::int64_t>(train.size());
  rec.n_test = static_cast<std::int64_t>(test.size());
  rec.fit_seconds = fit_seconds;
  rec.score_seconds = score_seconds;
  return rec;
}

EvalOutcome within_session_prepared(const BandedWindows& windows, const Pipeline& pipeline,
                                    const EvalConfig& cfg, const std::string& subject_id,
                                    const std::string& session_id) {
  EvalOutcome out;
  const std::size_t n = windows.size();
  const auto n_train =
      static_cast<std::size_t>(std::ceil(cfg.train_fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train >= n) {
    out.skip_reason = "degenerate split: " + std::to_string(n) + " windows";
    return out;
  }

  std::vector<std::size_t> train_idx(n_train), test_idx(n - n_train);
  for (std::size_t i = 0; i < n_train; ++i) train_idx[i] = i;
  for (std::size_t i = n_train; i < n; ++i) test_idx[i - n_train] = i;
  const BandedWindows train = windows.select(train_idx);
  const BandedWindows test = windows.select(test_idx);

  if (distinct_labels(train.labels()) < 2 || distinct_labels(test.labels()) < 2) {
    out.skip_reason = "degenerate split: fewer than two classes on one side";
    return out;
  }

  out.audit.max_train_onset =
      *std::max_element(train.bands.front().onsets.begin(), train.bands.front().onsets.end());
  out.audit.min_test_onset =
      *std::min_element(test.bands.front().onsets.begin(), test.bands.front().onsets.end());
  out.audit.train_sessions = {session_id};
  out.audit.test_sessions = {session_id};

  EvalRecord rec = fit_and_score(pipeline, train, test, cfg, nullptr);
  rec.subject_id = subject_id;
  rec.session_id = session_id;
  rec.protocol = Protocol::within_session;
  out.record = std::move(rec);
  return out;
}

std::vector<const Recording*> to_pointers(const std::vector<Recording>& recs) {
  std::vector<const Recording*> out;
  out.reserve(recs.size());
  for (const Recording& r : recs) out.push_back(&r);
  return out;
}

}  // namespace

EvalOutcome within_session(const std::vector<Recording>& session_runs, const Pipeline& pipeline,
                           const EvalConfig& cfg) {
  if (session_runs.empty()) throw parameter_error("no recordings");
  const BandedWindows windows =
      prepare_banded(to_pointers(session_runs), cfg, pipeline.uses_filter_bank);
  return within_session_prepared(windows, pipeline, cfg, session_runs.front().subject_id,
                                 session_runs.front().session_id);
}

namespace {

std::vector<EvalOutcome> cross_session_prepared(
    const std::vector<std::string>& session_ids,
    const std::vector<BandedWindows>& per_session, const Pipeline& pipeline,
    const EvalConfig& cfg, const std::string& subject_id) {
  if (session_ids.size() < 2)
    throw validation_error("cross-session evaluation needs at least two sessions");

  auto concat = [](const std::vector<const BandedWindows*>& parts) {
    BandedWindows out;
    out.bands.resize(parts.front()->bands.size());
    for (const BandedWindows* p : parts)
      for (std::size_t b = 0; b < p->bands.size(); ++b)
        append_with_offset(out.bands[b], p->bands[b], 0);
    for (WindowSet& band : out.bands) refresh_class_names(band);
    return out;
  };

  // Flat style tunes once on all sessions pooled and reuses the choice.
  std::optional<ParamMap> flat_params;
  if (cfg.cv_style == CvStyle::flat) {
    std::vector<const BandedWindows*> all;
    for (const BandedWindows& s : per_session) all.push_back(&s);
    flat_params = grid_search(pipeline, concat(all), cfg.inner_folds).best_params;
  }

  std::vector<EvalOutcome> outcomes;
  for (std::size_t held = 0; held < session_ids.size(); ++held) {
    EvalOutcome out;
    out.audit.test_sessions = {session_ids[held]};
    for (std::size_t s = 0; s < session_ids.size(); ++s)
      if (s != held) out.audit.train_sessions.push_back(session_ids[s]);

    std::vector<const BandedWindows*> train_parts;
    for (std::size_t s = 0; s < session_ids.size(); ++s)
      if (s != held) train_parts.push_back(&per_session[s]);
    const BandedWindows train = concat(train_parts);
    const BandedWindows& test = per_session[held];

    if (distinct_labels(train.labels()) < 2 || distinct_labels(test.labels()) < 2) {
      out.skip_reason = "degenerate fold: fewer than two classes";
      outcomes.push_back(std::move(out));
      continue;
    }

    EvalRecord rec = fit_and_score(pipeline, train, test, cfg,
                                   flat_params ? &*flat_params : nullptr);
    rec.subject_id = subject_id;
    rec.session_id = session_ids[held];
    rec.protocol = cfg.cv_style == CvStyle::flat ? Protocol::cross_session_flat
                                                 : Protocol::cross_session_nested;
    out.record = std::move(rec);
    outcomes.push_back(std::move(out));
  }
  return outcomes;
}

}  // namespace

std::vector<EvalOutcome> cross_session(const std::vector<Recording>& subject_recordings,
                                       const Pipeline& pipeline, const EvalConfig& cfg) {
  if (subject_recordings.empty()) throw parameter_error("no recordings");

  std::map<std::string, std::vector<const Recording*>> by_session;
  for (const Recording& r : subject_recordings) by_session[r.session_id].push_back(&r);

  std::vector<std::string> session_ids;
  std::vector<BandedWindows> per_session;
  for (const auto& [sid, runs] : by_session) {
    session_ids.push_back(sid);
    per_session.push_back(prepare_banded(runs, cfg, pipeline.uses_filter_bank));
  }
  return cross_session_prepared(session_ids, per_session, pipeline, cfg,
                                subject_recordings.front().subject_id);
}

namespace {

struct Task {
  const Dataset* dataset = nullptr;
  std::string subject_id;
  std::string session_id;  // within-session only
  std::vector<const Recording*> recordings;
};

struct TaskOutput {
  std::vector<EvalRecord> records;
  std::vector<SkipRecord> skips;
  std::vector<EvalOutcome> outcomes;
};

void run_task(const Task& task, const std::vector<Pipeline>& pipelines, const EvalConfig& cfg,
              TaskOutput& out) {
  // Window preparation is shared between pipelines with the same band layout.
  std::map<bool, BandedWindows> prepared_within;
  std::map<bool, std::pair<std::vector<std::string>, std::vector<BandedWindows>>> prepared_cross;

  for (const Pipeline& pipeline : pipelines) {
    SkipRecord skip{task.dataset->id, task.subject_id, task.session_id, pipeline.id, ""};
    try {
      if (cfg.protocol == ProtocolKind::within_session) {
        auto it = prepared_within.find(pipeline.uses_filter_bank);
        if (it == prepared_within.end())
          it = prepared_within
                   .emplace(pipeline.uses_filter_bank,
                            prepare_banded(task.recordings, cfg, pipeline.uses_filter_bank))
                   .first;
        EvalOutcome outcome =
            within_session_prepared(it->second, pipeline, cfg, task.subject_id, task.session_id);
        if (outcome.record) {
          outcome.record->dataset_id = task.dataset->id;
          out.records.push_back(*outcome.record);
        } else {
          skip.reason = outcome.skip_reason;
          out.skips.push_back(skip);
        }
        out.outcomes.push_back(std::move(outcome));
      } else {
        auto it = prepared_cross.find(pipeline.uses_filter_bank);
        if (it == prepared_cross.end()) {
          std::map<std::string, std::vector<const Recording*>> by_session;
          for (const Recording* r : task.recordings) by_session[r->session_id].push_back(r);
          std::vector<std::string> ids;
          std::vector<BandedWindows> windows;
          for (const auto& [sid, runs] : by_session) {
            ids.push_back(sid);
            windows.push_back(prepare_banded(runs, cfg, pipeline.uses_filter_bank));
          }
          it = prepared_cross
                   .emplace(pipeline.uses_filter_bank,
                            std::make_pair(std::move(ids), std::move(windows)))
                   .first;
        }
        auto outcomes = cross_session_prepared(it->second.first, it->second.second, pipeline,
                                               cfg, task.subject_id);
        for (EvalOutcome& outcome : outcomes) {
          if (outcome.record) {
            outcome.record->dataset_id = task.dataset->id;
            out.records.push_back(*outcome.record);
          } else {
            SkipRecord fold_skip = skip;
            fold_skip.session_id = outcome.audit.test_sessions.empty()
                                       ? std::string()
                                       : outcome.audit.test_sessions.front();
            fold_skip.reason = outcome.skip_reason;
            out.skips.push_back(std::move(fold_skip));
          }
          out.outcomes.push_back(std::move(outcome));
        }
      }
    } catch (const std::exception& e) {
      skip.reason = e.what();
      out.skips.push_back(skip);
    }
  }
}

}  // namespace

BenchmarkResult run_benchmark(const std::vector<Dataset>& datasets,
                              const std::vector<Pipeline>& pipelines, const EvalConfig& cfg,
                              int jobs) {
  if (datasets.empty()) throw parameter_error("no datasets");
  if (pipelines.empty()) throw parameter_error("no pipelines");

  // Deterministic task list: datasets in input order, subjects and sessions sorted.
  std::vector<Task> tasks;
  for (const Dataset& ds : datasets) {
    std::map<std::string, std::map<std::string, std::vector<const Recording*>>> grouped;
    for (const Recording& r : ds.recordings) grouped[r.subject_id][r.session_id].push_back(&r);
    for (const auto& [subject, sessions] : grouped) {
      if (cfg.protocol == ProtocolKind::within_session) {
        for (const auto& [session, runs] : sessions)
          tasks.push_back({&ds, subject, session, runs});
      } else {
        Task t{&ds, subject, "", {}};
        for (const auto& [session, runs] : sessions)
          t.recordings.insert(t.recordings.end(), runs.begin(), runs.end());
        tasks.push_back(std::move(t));
      }
    }
  }

  std::vector<TaskOutput> outputs(tasks.size());
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) run_task(tasks[i], pipelines, cfg, outputs[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
          run_task(tasks[i], pipelines, cfg, outputs[i]);
      });
    for (std::thread& t : pool) t.join();
  }

  BenchmarkResult result;
  for (TaskOutput& o : outputs) {
    std::move(o.records.begin(), o.records.end(), std::back_inserter(result.records));
    std::move(o.skips.begin(), o.skips.end(), std::back_inserter(result.skips));
    std::move(o.outcomes.begin(), o.outcomes.end(), std::back_inserter(result.outcomes));
  }
  return result;
}

}  // namespace pseudobench
