#include "cortex/signal/pooling.hpp"

namespace cortex::signal {

PoolingMap::PoolingMap(std::size_t T, std::size_t L) : input_length_(T) {
  if (T == 0) throw DataError("adaptive pooling of an empty recording (T = 0)");
  if (L == 0) throw ParameterError("adaptive pooling target length must be positive");
  windows_.reserve(L);
  for (std::size_t j = 0; j < L; ++j) {
    const std::size_t start = (j * T) / L;
    const std::size_t end = ((j + 1) * T + L - 1) / L;
    windows_.push_back({start, end});
  }
}

template <typename T>
nn::BasicTensor<T> adaptive_avg_pool(const nn::BasicTensor<T>& values, std::size_t target_length) {
  if (values.rank() != 2) {
    throw ShapeError("adaptive_avg_pool expects [C, T], got " + nn::shape_string(values.dims()));
  }
  const std::size_t C = values.dim(0);
  const std::size_t len = values.dim(1);
  const PoolingMap map(len, target_length);
  nn::BasicTensor<T> out({C, target_length});
  // Prefix sums in double make every window an O(1) difference.
  std::vector<double> prefix(len + 1);
  for (std::size_t c = 0; c < C; ++c) {
    const T* row = values.ptr() + c * len;
    prefix[0] = 0.0;
    for (std::size_t t = 0; t < len; ++t) prefix[t + 1] = prefix[t] + static_cast<double>(row[t]);
    T* dst = out.ptr() + c * target_length;
    for (std::size_t j = 0; j < target_length; ++j) {
      const auto& w = map.windows()[j];
      if (w.end - w.start == 1) {
        dst[j] = row[w.start];
      } else {
        dst[j] = static_cast<T>((prefix[w.end] - prefix[w.start]) / static_cast<double>(w.end - w.start));
      }
    }
  }
  return out;
}

PooledSignal adaptive_avg_pool(const EegRecording& recording, std::size_t target_length) {
  return {adaptive_avg_pool(recording.values, target_length)};
}

template nn::BasicTensor<float> adaptive_avg_pool<float>(const nn::BasicTensor<float>&, std::size_t);
template nn::BasicTensor<double> adaptive_avg_pool<double>(const nn::BasicTensor<double>&, std::size_t);

}  // namespace cortex::signal
