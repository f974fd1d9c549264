#pragma once

#include <cstddef>
#include <vector>

#include "cortex/nn/tensor.hpp"
#include "cortex/signal/recording.hpp"

namespace cortex::signal {

struct PoolingWindow {
  std::size_t start;  ///< inclusive
  std::size_t end;    ///< exclusive
};

/// Index windows of adaptive average pooling from `input_length` samples to
/// `target_length` outputs: window j is [floor(j*T/L'), ceil((j+1)*T/L')).
class PoolingMap {
 public:
  PoolingMap(std::size_t input_length, std::size_t target_length);

  std::size_t input_length() const noexcept { return input_length_; }
  std::size_t target_length() const noexcept { return windows_.size(); }
  const std::vector<PoolingWindow>& windows() const noexcept { return windows_; }

 private:
  std::size_t input_length_;
  std::vector<PoolingWindow> windows_;
};

/// Averages each row of a [C, T] tensor over the windows of PoolingMap(T, L').
/// Throws DataError for an empty input and ShapeError for a non-matrix.
template <typename T>
nn::BasicTensor<T> adaptive_avg_pool(const nn::BasicTensor<T>& values, std::size_t target_length = kPooledLength);

PooledSignal adaptive_avg_pool(const EegRecording& recording, std::size_t target_length = kPooledLength);

}  // namespace cortex::signal
