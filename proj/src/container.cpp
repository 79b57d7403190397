#include "pseudobench/container.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pseudobench/errors.hpp"

namespace pseudobench {

namespace {

using ordered_json = nlohmann::ordered_json;

// Fetch a manifest field, naming the field in the error on absence or wrong type.
template <typename T>
T field(const ordered_json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw format_error(std::string("manifest missing field '") + name + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw format_error(std::string("manifest field '") + name + "' has wrong type");
  }
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw io_error("cannot open " + p.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void append_f32_le(std::vector<std::uint8_t>& out, float v) {
  const auto u = std::bit_cast<std::uint32_t>(v);
  out.push_back(static_cast<std::uint8_t>(u & 0xFF));
  out.push_back(static_cast<std::uint8_t>((u >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((u >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((u >> 24) & 0xFF));
}

float f32_le_at(const std::vector<std::uint8_t>& bytes, std::size_t i) {
  const std::uint32_t u = static_cast<std::uint32_t>(bytes[i]) |
                          (static_cast<std::uint32_t>(bytes[i + 1]) << 8) |
                          (static_cast<std::uint32_t>(bytes[i + 2]) << 16) |
                          (static_cast<std::uint32_t>(bytes[i + 3]) << 24);
  return std::bit_cast<float>(u);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Recording read_recording(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw io_error("cannot open " + manifest_path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw format_error("malformed manifest " + manifest_path.string() + ": " + e.what());
  }

  Recording rec;
  rec.subject_id = field<std::string>(j, "subject_id");
  rec.session_id = field<std::string>(j, "session_id");
  rec.sample_rate_hz = field<double>(j, "sample_rate_hz");
  rec.channel_names = field<std::vector<std::string>>(j, "channel_names");
  const auto n_samples = field<std::int64_t>(j, "n_samples");
  const auto payload_name = field<std::string>(j, "payload");
  if (n_samples < 1) throw format_error("manifest field 'n_samples' must be >= 1");
  if (rec.channel_names.empty()) throw format_error("manifest field 'channel_names' is empty");

  const auto events = field<ordered_json>(j, "events");
  if (!events.is_array()) throw format_error("manifest field 'events' must be an array");
  for (const auto& ev : events) {
    EventSpan span;
    span.onset_sample = field<std::int64_t>(ev, "onset_sample");
    span.duration_samples = field<std::int64_t>(ev, "duration_samples");
    span.label = field<std::string>(ev, "label");
    rec.events.push_back(std::move(span));
  }

  const auto payload_path = manifest_path.parent_path() / payload_name;
  const auto bytes = read_file_bytes(payload_path);
  const std::size_t channels = rec.channel_names.size();
  const std::size_t expected = channels * static_cast<std::size_t>(n_samples) * 4;
  if (bytes.size() != expected) {
    std::ostringstream msg;
    msg << "payload size mismatch in " << payload_path.string() << ": expected " << expected
        << " bytes (" << channels << " x " << n_samples << " x 4), got " << bytes.size();
    throw format_error(msg.str());
  }

  rec.samples.resize(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(n_samples));
  std::size_t pos = 0;
  for (std::size_t c = 0; c < channels; ++c)
    for (std::int64_t t = 0; t < n_samples; ++t, pos += 4)
      rec.samples(static_cast<Eigen::Index>(c), t) = static_cast<double>(f32_le_at(bytes, pos));

  rec.validate();
  return rec;
}

void write_recording(const Recording& rec, const std::filesystem::path& manifest_path) {
  rec.validate();

  auto payload_path = manifest_path;
  payload_path.replace_extension(".f32");

  ordered_json j;
  j["subject_id"] = rec.subject_id;
  j["session_id"] = rec.session_id;
  j["sample_rate_hz"] = rec.sample_rate_hz;
  j["channel_names"] = rec.channel_names;
  j["n_samples"] = static_cast<std::int64_t>(rec.length());
  j["payload"] = payload_path.filename().string();
  j["events"] = ordered_json::array();
  for (const EventSpan& ev : rec.events)
    j["events"].push_back({{"onset_sample", ev.onset_sample},
                           {"duration_samples", ev.duration_samples},
                           {"label", ev.label}});

  std::ofstream mout(manifest_path);
  if (!mout) throw io_error("cannot write " + manifest_path.string());
  mout << j.dump(2) << "\n";
  if (!mout) throw io_error("write failed: " + manifest_path.string());

  std::vector<std::uint8_t> bytes;
  bytes.reserve(static_cast<std::size_t>(rec.samples.size()) * 4);
  for (Eigen::Index c = 0; c < rec.channels(); ++c)
    for (Eigen::Index t = 0; t < rec.length(); ++t)
      append_f32_le(bytes, static_cast<float>(rec.samples(c, t)));

  std::ofstream pout(payload_path, std::ios::binary);
  if (!pout) throw io_error("cannot write " + payload_path.string());
  pout.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  if (!pout) throw io_error("write failed: " + payload_path.string());
}

namespace {

constexpr const char* kResultsHeader =
    "dataset,subject,session,pipeline,mode,protocol,nmcc,accuracy,kappa,itr,"
    "n_train,n_test,fit_s,score_s";

ordered_json record_to_json(const EvalRecord& r) {
  ordered_json j;
  j["dataset"] = r.dataset_id;
  j["subject"] = r.subject_id;
  j["session"] = r.session_id;
  j["pipeline"] = r.pipeline_id;
  j["mode"] = to_string(r.mode);
  j["protocol"] = to_string(r.protocol);
  j["nmcc"] = r.nmcc;
  j["accuracy"] = r.accuracy;
  j["kappa"] = r.kappa;
  j["itr"] = r.itr_bits_per_min;
  j["n_train"] = r.n_train;
  j["n_test"] = r.n_test;
  j["fit_s"] = r.fit_seconds;
  j["score_s"] = r.score_seconds;
  return j;
}

EvalRecord record_from_json(const ordered_json& j) {
  EvalRecord r;
  r.dataset_id = field<std::string>(j, "dataset");
  r.subject_id = field<std::string>(j, "subject");
  r.session_id = field<std::string>(j, "session");
  r.pipeline_id = field<std::string>(j, "pipeline");
  r.mode = eval_mode_from_string(field<std::string>(j, "mode"));
  r.protocol = protocol_from_string(field<std::string>(j, "protocol"));
  r.nmcc = field<double>(j, "nmcc");
  r.accuracy = field<double>(j, "accuracy");
  r.kappa = field<double>(j, "kappa");
  r.itr_bits_per_min = field<double>(j, "itr");
  r.n_train = field<std::int64_t>(j, "n_train");
  r.n_test = field<std::int64_t>(j, "n_test");
  r.fit_seconds = field<double>(j, "fit_s");
  r.score_seconds = field<double>(j, "score_s");
  return r;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_results(const std::vector<EvalRecord>& records, const std::filesystem::path& path,
                   ResultsFormat format) {
  if (records.empty()) throw parameter_error("no records to write");

  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());

  if (format == ResultsFormat::csv) {
    out << kResultsHeader << "\n";
    for (const EvalRecord& r : records) {
      out << r.dataset_id << ',' << r.subject_id << ',' << r.session_id << ',' << r.pipeline_id
          << ',' << to_string(r.mode) << ',' << to_string(r.protocol) << ','
          << format_double(r.nmcc) << ',' << format_double(r.accuracy) << ','
          << format_double(r.kappa) << ',' << format_double(r.itr_bits_per_min) << ',' << r.n_train
          << ',' << r.n_test << ',' << format_double(r.fit_seconds) << ','
          << format_double(r.score_seconds) << "\n";
    }
  } else {
    ordered_json arr = ordered_json::array();
    for (const EvalRecord& r : records) arr.push_back(record_to_json(r));
    out << arr.dump(2) << "\n";
  }
  if (!out) throw io_error("write failed: " + path.string());
}

std::vector<EvalRecord> read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());

  std::vector<EvalRecord> records;
  if (path.extension() == ".json") {
    ordered_json arr;
    try {
      in >> arr;
    } catch (const nlohmann::json::exception& e) {
      throw format_error("malformed results " + path.string() + ": " + e.what());
    }
    if (!arr.is_array()) throw format_error("results " + path.string() + " is not a JSON array");
    for (const auto& j : arr) records.push_back(record_from_json(j));
    return records;
  }

  std::string line;
  if (!std::getline(in, line)) throw format_error("empty results file " + path.string());
  if (split_csv_line(line) != split_csv_line(kResultsHeader))
    throw format_error("unexpected results header in " + path.string());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 14)
      throw format_error("bad column count at " + path.string() + ":" + std::to_string(lineno));
    EvalRecord r;
    try {
      r.dataset_id = f[0];
      r.subject_id = f[1];
      r.session_id = f[2];
      r.pipeline_id = f[3];
      r.mode = eval_mode_from_string(f[4]);
      r.protocol = protocol_from_string(f[5]);
      r.nmcc = std::stod(f[6]);
      r.accuracy = std::stod(f[7]);
      r.kappa = std::stod(f[8]);
      r.itr_bits_per_min = std::stod(f[9]);
      r.n_train = std::stoll(f[10]);
      r.n_test = std::stoll(f[11]);
      r.fit_seconds = std::stod(f[12]);
      r.score_seconds = std::stod(f[13]);
    } catch (const std::exception&) {
      throw format_error("bad value at " + path.string() + ":" + std::to_string(lineno));
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace pseudobench
