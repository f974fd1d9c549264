#include "cortex/nn/loss.hpp"

#include <algorithm>
#include <cmath>

namespace cortex::nn {

template <typename T>
T mse_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target) {
  require_same_shape(pred, target, "mse_loss");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
    acc += d * d;
  }
  return static_cast<T>(pred.size() ? acc / static_cast<double>(pred.size()) : 0.0);
}

template <typename T>
LossValue<T> mse_loss_with_grad(const BasicTensor<T>& pred, const BasicTensor<T>& target) {
  LossValue<T> out{mse_loss(pred, target), BasicTensor<T>(pred.dims())};
  const T scale = static_cast<T>(2.0 / static_cast<double>(pred.size()));
  for (std::size_t i = 0; i < pred.size(); ++i) out.grad[i] = scale * (pred[i] - target[i]);
  return out;
}

template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits) {
  if (logits.rank() != 2) throw ShapeError("softmax expects [B, V], got " + shape_string(logits.dims()));
  const std::size_t B = logits.dim(0);
  const std::size_t V = logits.dim(1);
  BasicTensor<T> p(logits.dims());
  for (std::size_t b = 0; b < B; ++b) {
    const T* z = logits.ptr() + b * V;
    T* out = p.ptr() + b * V;
    const T zmax = *std::max_element(z, z + V);
    double total = 0.0;
    for (std::size_t v = 0; v < V; ++v) {
      out[v] = static_cast<T>(std::exp(static_cast<double>(z[v] - zmax)));
      total += out[v];
    }
    for (std::size_t v = 0; v < V; ++v) out[v] = static_cast<T>(out[v] / total);
  }
  return p;
}

template <typename T>
LossValue<T> softmax_cross_entropy(const BasicTensor<T>& logits, std::span<const std::size_t> labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw ShapeError("softmax_cross_entropy: logits " + shape_string(logits.dims()) + " vs " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t B = logits.dim(0);
  const std::size_t V = logits.dim(1);
  LossValue<T> out{T{0}, softmax(logits)};
  double loss = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    if (labels[b] >= V) throw ParameterError("label " + std::to_string(labels[b]) + " out of range");
    T* g = out.grad.ptr() + b * V;
    loss -= std::log(std::max(static_cast<double>(g[labels[b]]), 1e-300));
    g[labels[b]] -= T{1};
    for (std::size_t v = 0; v < V; ++v) g[v] /= static_cast<T>(B);
  }
  out.value = static_cast<T>(loss / static_cast<double>(B));
  return out;
}

#define CORTEX_INSTANTIATE(T)                                                                   \
  template T mse_loss<T>(const BasicTensor<T>&, const BasicTensor<T>&);                          \
  template LossValue<T> mse_loss_with_grad<T>(const BasicTensor<T>&, const BasicTensor<T>&);     \
  template BasicTensor<T> softmax<T>(const BasicTensor<T>&);                                     \
  template LossValue<T> softmax_cross_entropy<T>(const BasicTensor<T>&, std::span<const std::size_t>);

CORTEX_INSTANTIATE(float)
CORTEX_INSTANTIATE(double)

#undef CORTEX_INSTANTIATE

}  // namespace cortex::nn
