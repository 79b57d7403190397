#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pseudobench/types.hpp"

namespace pseudobench {

// Portable recording container: a JSON manifest `<name>.json` next to a raw
// payload of channels x length little-endian IEEE-754 binary32 values,
// channel-major (all samples of channel 0, then channel 1, ...). Events are
// stored in samples. The payload round-trips bit-exactly; in-memory samples
// are double.

Recording read_recording(const std::filesystem::path& manifest_path);
void write_recording(const Recording& rec, const std::filesystem::path& manifest_path);

enum class ResultsFormat { csv, json };

// Persist EvalRecords. CSV column order is fixed:
//   dataset,subject,session,pipeline,mode,protocol,nmcc,accuracy,kappa,itr,
//   n_train,n_test,fit_s,score_s
// JSON is an array of flat objects with the same keys. Empty input is an error.
void write_results(const std::vector<EvalRecord>& records, const std::filesystem::path& path,
                   ResultsFormat format);
std::vector<EvalRecord> read_results(const std::filesystem::path& path);

}  // namespace pseudobench
