#pragma once

#include <cstddef>
#include <span>

#include "cortex/nn/tensor.hpp"

namespace cortex::nn {

template <typename T>
struct LossValue {
  T value{};
  BasicTensor<T> grad;  ///< d(value)/d(prediction), same shape as the prediction
};

/// Mean over all elements of (pred - target)^2.
template <typename T>
T mse_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target);

template <typename T>
LossValue<T> mse_loss_with_grad(const BasicTensor<T>& pred, const BasicTensor<T>& target);

/// Row-wise softmax of [B, V] logits.
template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits);

/// Mean over the batch of -log softmax(logits)[label].
template <typename T>
LossValue<T> softmax_cross_entropy(const BasicTensor<T>& logits, std::span<const std::size_t> labels);

}  // namespace cortex::nn
