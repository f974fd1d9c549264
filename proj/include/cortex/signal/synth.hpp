#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cortex/nn/rng.hpp"
#include "cortex/nn/tensor.hpp"
#include "cortex/signal/dataset.hpp"
#include "cortex/signal/recording.hpp"

namespace cortex::signal {

struct SynthConfig {
  std::size_t subjects = 10;
  std::size_t samples_per_subject = 200;
  std::size_t vocab_size = 50;
  std::size_t channels = kDefaultChannels;
  std::size_t t_min = 280;
  std::size_t t_max = 320;
  double alpha = 0.5;  ///< subject-confound strength
  double sigma = 0.1;  ///< additive white-noise std
  std::size_t embedding_dim = 64;
};

/// Deterministic stand-in for a reading-task EEG corpus.
///
/// Every subject reads the same stimulus sequence: item i has one token and
/// one duration T_i shared by all subjects. A recording is
///
///   X = P_v + alpha * (M_s P_v + A * sum_k c_k B_k) + sigma * noise
///
/// where P_v is the token's spatio-temporal prototype (a few sinusoids with
/// random spatial loadings, defined on normalized time so any T works), M_s
/// the subject's channel-mixing matrix, and B_k a small set of confound
/// patterns shared by everyone whose coefficients c = a_s + jitter have a
/// subject-specific mean a_s. The token signal is therefore
/// subject-independent while the confound is subject-dependent.
class SyntheticGenerator {
 public:
  SyntheticGenerator(const SynthConfig& config, const nn::RngStream& rng);

  const SynthConfig& config() const noexcept { return config_; }
  /// Sample records are subject-major; tensor paths point into recordings/.
  const DatasetManifest& manifest() const noexcept { return manifest_; }
  const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }
  /// [vocab_size, embedding_dim] target embedding table.
  const nn::Tensor& embedding_table() const noexcept { return embedding_table_; }
  std::size_t size() const noexcept { return manifest_.samples.size(); }

  /// Pure function of (config, seed, index).
  EegRecording generate(std::size_t index) const;

 private:
  struct Waveform {
    std::vector<double> loadings;  // [channels, components]
    std::vector<double> frequency;
    std::vector<double> phase;
  };

  void temporal_basis(const Waveform& w, std::size_t T, std::vector<double>& out) const;

  SynthConfig config_;
  std::uint64_t seed_;
  DatasetManifest manifest_;
  std::vector<std::string> vocabulary_;
  nn::Tensor embedding_table_;
  std::vector<Waveform> prototypes_;
  std::vector<Waveform> confounds_;
  std::vector<std::vector<double>> mixed_loadings_;  // [subject * V + v] -> M_s * loadings_v
  std::vector<std::vector<double>> confound_mean_;   // [subject] -> a_s
  std::vector<std::size_t> item_token_;
  std::vector<std::size_t> item_length_;
};

struct SynthDataset {
  DatasetManifest manifest;
  std::vector<EegRecording> recordings;
  std::vector<std::string> vocabulary;
  nn::Tensor embedding_table;
};

/// Throws ParameterError for a degenerate config (V < 2, S < 2, empty ranges).
SynthDataset synth_generate(const SynthConfig& config, nn::RngStream& rng);

/// Writes manifest.json, vocab.txt, embeddings.eegt and recordings/ under
/// `dir`, generating one recording at a time.
void write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticGenerator& generator);

/// Token text for synthetic token `id`: one CJK ideograph per id.
std::string synthetic_token_text(std::size_t id);

}  // namespace cortex::signal
