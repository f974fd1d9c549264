#pragma once

#include <cstddef>
#include <string>

#include "cortex/nn/tensor.hpp"

namespace cortex::signal {

inline constexpr std::size_t kDefaultChannels = 128;
inline constexpr std::size_t kPooledLength = 256;

/// One subject's multichannel recording for one stimulus, [channels, T] in
/// microvolts.
struct EegRecording {
  std::string subject_id;
  nn::Tensor values;

  std::size_t channels() const { return values.dim(0); }
  std::size_t duration() const { return values.dim(1); }
};

/// A recording resampled to a fixed length, [channels, target_length].
struct PooledSignal {
  nn::Tensor values;
};

}  // namespace cortex::signal
