#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "cortex/nn/optimizer.hpp"
#include "cortex/nn/rng.hpp"

namespace cortex {

/// Shared knobs of every training loop. Defaults: Adam, lr 1e-3, batch 32.
struct TrainOptions {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  nn::OptimizerOptions optimizer{};
};

/// Called after each epoch with (epoch index starting at 1, mean loss).
using EpochCallback = std::function<void(std::size_t, double)>;

/// Shuffled minibatches of [0, n). A trailing batch of one sample is merged
/// into its predecessor so batch-norm always sees at least two rows.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, nn::RngStream& rng,
                                                   bool shuffle = true);

}  // namespace cortex
