#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cortex/ablations/finetune.hpp"
#include "cortex/decode.hpp"
#include "cortex/signal/synth.hpp"
#include "cortex/training.hpp"

namespace cortex::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kBackend = 3 };

struct AblateSettings {
  std::size_t repetitions = 3;
  std::size_t train_subjects = 8;
  std::size_t test_subjects = 1;
  std::vector<std::size_t> knn_k{5, 10, 50, 100, 1000};
  std::vector<std::size_t> tree_depth{5, 10, 15, 20};
  std::size_t mlp_epochs = 500;
  std::size_t finetune_epochs = 20;
  ablations::HeadLoss head_loss = ablations::HeadLoss::mse;
  std::size_t linear_bins = 32;
};

/// Everything a command needs. Loaded from an optional JSON file, then
/// overridden by flags.
struct RunConfig {
  std::filesystem::path out = "run";
  std::optional<std::filesystem::path> data;
  std::uint64_t seed = 1;
  std::string backend = "surrogate";
  std::optional<std::filesystem::path> embedding_table;
  std::optional<std::filesystem::path> vocab;
  std::string precision = "float32";

  signal::SynthConfig gen{};
  std::size_t mask = 1;
  std::vector<std::string> masked_subjects;

  std::size_t latent_dim = 64;
  TrainOptions autoencoder{50, 32, {}};
  TrainOptions alignment{100, 32, {}};
  double dropout = 0.3;

  PromptSpec prompt{};
  AblateSettings ablate{};

  std::filesystem::path data_dir() const { return data ? *data : out / "data"; }
  std::filesystem::path table_path() const { return embedding_table ? *embedding_table : data_dir() / "embeddings.eegt"; }
  std::filesystem::path vocab_path() const { return vocab ? *vocab : data_dir() / "vocab.txt"; }
  std::filesystem::path ae_dir() const { return out / "checkpoints" / "ae"; }
  std::filesystem::path align_dir() const { return out / "checkpoints" / "align"; }
  bool bridge() const { return backend.rfind("bridge:", 0) == 0; }
  std::string bridge_url() const { return bridge() ? backend.substr(7) : std::string(); }
  /// Throws ParameterError on an inconsistent configuration.
  void validate() const;
};

/// Parses a JSON config file over `base`. Unknown keys are errors.
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Runs the command line `args` (args[0] is the program name) and returns
/// the process exit code. Human-readable output goes to `out`, errors to
/// `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cortex::cli
