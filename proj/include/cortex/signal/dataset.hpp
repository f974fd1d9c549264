#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cortex/signal/recording.hpp"

namespace cortex::signal {

/// One EEG sample paired with a single target token.
struct SampleRecord {
  std::string tensor;  ///< path of the EEGT file, relative to the manifest
  std::string subject;
  std::size_t token_id = 0;
  std::string token_text;

  bool operator==(const SampleRecord&) const = default;
};

struct DatasetManifest {
  std::size_t vocab_size = 0;
  std::size_t embedding_dim = 0;
  std::vector<std::string> subjects;
  std::vector<SampleRecord> samples;

  /// Throws DataError naming the first offending record.
  void validate() const;
  bool operator==(const DatasetManifest&) const = default;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// UTF-8, one token per line; line index is the token id.
std::vector<std::string> read_vocabulary(const std::filesystem::path& path);
/// One token per line; a trailing CR is dropped.
std::vector<std::string> parse_vocabulary(std::istream& in);
void write_vocabulary(const std::filesystem::path& path, const std::vector<std::string>& tokens);

/// A validated manifest whose recordings are read on demand.
class Dataset {
 public:
  /// Parses and validates the manifest and checks every tensor header:
  /// file present, rank 2, and one channel count across the dataset.
  static Dataset load(const std::filesystem::path& manifest_path);

  const DatasetManifest& manifest() const noexcept { return manifest_; }
  const std::filesystem::path& root() const noexcept { return root_; }
  std::size_t size() const noexcept { return manifest_.samples.size(); }
  /// 0 when the dataset has no samples.
  std::size_t channels() const noexcept { return channels_; }

  std::filesystem::path tensor_path(std::size_t index) const;
  EegRecording load_recording(std::size_t index) const;
  std::map<std::string, std::size_t> counts_per_subject() const;

 private:
  DatasetManifest manifest_;
  std::filesystem::path root_;
  std::size_t channels_ = 0;
};

}  // namespace cortex::signal
