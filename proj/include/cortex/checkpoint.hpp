#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cortex/alignment.hpp"
#include "cortex/autoencoder.hpp"

namespace cortex {

// A checkpoint is a directory holding model.json (hyperparameters, split and
// seed, list of tensor files) plus one EEGT file per tensor. The descriptor
// has sorted keys and no timestamps, so equal models give equal bytes.

struct CheckpointInfo {
  std::uint64_t seed = 0;
  std::vector<std::string> train_subjects;
  std::vector<std::string> masked_subjects;
};

inline constexpr const char* kCheckpointDescriptor = "model.json";

void save_autoencoder(const std::filesystem::path& dir, const Autoencoder<float>& model, const CheckpointInfo& info);
Autoencoder<float> load_autoencoder(const std::filesystem::path& dir, CheckpointInfo* info = nullptr);

void save_alignment(const std::filesystem::path& dir, const AlignmentModel<float>& model, const CheckpointInfo& info);
/// The loaded model is frozen.
AlignmentModel<float> load_alignment(const std::filesystem::path& dir, CheckpointInfo* info = nullptr);

/// True when `dir` contains a checkpoint descriptor.
bool checkpoint_exists(const std::filesystem::path& dir);

}  // namespace cortex
