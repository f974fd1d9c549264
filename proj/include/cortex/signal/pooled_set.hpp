#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cortex/nn/tensor.hpp"
#include "cortex/signal/dataset.hpp"
#include "cortex/signal/recording.hpp"
#include "cortex/signal/split.hpp"
#include "cortex/signal/synth.hpp"

namespace cortex::signal {

/// A pooled recording plus the labels every downstream stage needs.
struct PooledSample {
  std::size_t sample_id = 0;  ///< index in the originating manifest
  std::string subject;
  std::size_t token_id = 0;
  std::string token_text;
  nn::Tensor values;  ///< [channels, target_length]
};

using PooledSet = std::vector<PooledSample>;
/// Non-owning selection of samples from a PooledSet.
using SampleView = std::vector<const PooledSample*>;

PooledSet pool_dataset(const Dataset& dataset, std::size_t target_length = kPooledLength);
PooledSet pool_synthetic(const SyntheticGenerator& generator, std::size_t target_length = kPooledLength);

/// Samples whose subject is in `subjects`, in dataset order.
SampleView select_subjects(const PooledSet& set, const std::vector<std::string>& subjects);
SampleView select_all(const PooledSet& set);

}  // namespace cortex::signal
