#pragma once

#include <cstdint>
#include <vector>

#include "cortex/nn/layers.hpp"

namespace cortex::nn {

enum class OptimizerKind { sgd, adam };

struct OptimizerOptions {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// SGD or bias-corrected Adam over a fixed set of parameters. step() applies
/// the update from the accumulated grads and then clears them.
template <typename T>
class Optimizer {
 public:
  explicit Optimizer(OptimizerOptions options = {});

  /// Registers the parameters and allocates zeroed moment buffers.
  void attach(ParameterRefs<T> params);

  /// Throws StateError if attach() was never called or a parameter changed
  /// shape since then.
  void step();
  void zero_grad();

  std::uint64_t steps() const noexcept { return step_; }
  const OptimizerOptions& options() const noexcept { return options_; }

 private:
  OptimizerOptions options_;
  ParameterRefs<T> params_;
  std::vector<BasicTensor<T>> first_moment_;
  std::vector<BasicTensor<T>> second_moment_;
  std::uint64_t step_ = 0;
  bool attached_ = false;
};

}  // namespace cortex::nn
