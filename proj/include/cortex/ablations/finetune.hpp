#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cortex/ablations/common.hpp"
#include "cortex/alignment.hpp"
#include "cortex/autoencoder.hpp"
#include "cortex/nn/layers.hpp"

namespace cortex::ablations {

/// Objective of the classifier head: MSE against one-hot rows (default) or
/// softmax cross-entropy.
enum class HeadLoss { mse, cross_entropy };

struct FinetuneConfig {
  std::size_t epochs = 20;
  std::optional<std::size_t> max_steps;  ///< overrides epochs when set
  std::size_t batch_size = 32;
  nn::OptimizerOptions optimizer{};
  HeadLoss loss = HeadLoss::mse;
};

/// Loss of `head` on precomputed backbone features [B, F]; when `backprop` is
/// set the gradient is accumulated into the head's parameters.
template <typename T>
T head_objective(nn::Linear<T>& head, const nn::BasicTensor<T>& features, std::span<const std::size_t> labels,
                 HeadLoss loss, bool backprop);

struct FinetuneResult {
  nn::Linear<float> head;  ///< W_cls [classes, F], b_cls [classes]
  std::vector<double> loss_history;
  std::size_t steps = 0;
};

/// Trains a linear head on the eval-mode d_3 features of a frozen backbone.
/// Throws StateError when the backbone is not frozen.
FinetuneResult finetune_head(const AlignmentModel<float>& backbone, const LabeledSet& latents, std::size_t classes,
                             const FinetuneConfig& config, nn::RngStream& rng);

std::vector<long> finetune_predict(const AlignmentModel<float>& backbone, const nn::Linear<float>& head,
                                   const nn::Tensor& latents);

}  // namespace cortex::ablations
