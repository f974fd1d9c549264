#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cortex/ablations/common.hpp"
#include "cortex/nn/layers.hpp"
#include "cortex/training.hpp"

namespace cortex::ablations {

struct MlpConfig {
  std::vector<std::size_t> hidden{256, 128};  ///< empty: a single linear layer
  std::size_t epochs = 500;
  /// When set, training stops after this many optimizer steps instead.
  std::optional<std::size_t> max_steps;
  std::size_t batch_size = 32;
  nn::OptimizerOptions optimizer{};
};

/// Linear -> ReLU stacks ending in a linear layer over `classes` logits,
/// trained with softmax cross-entropy.
class MlpClassifier {
 public:
  MlpClassifier(std::size_t input_dim, std::size_t classes, const MlpConfig& config, nn::RngStream& init);

  /// Returns the mean loss of each epoch.
  std::vector<double> fit(const LabeledSet& train, nn::RngStream& rng);
  nn::Tensor logits(const nn::Tensor& features) const;
  /// Row-wise softmax of the logits.
  nn::Tensor predict_proba(const nn::Tensor& features) const;
  std::vector<long> predict(const nn::Tensor& features) const;

  std::size_t steps() const noexcept { return steps_; }
  std::size_t classes() const noexcept { return classes_; }

 private:
  MlpConfig config_;
  std::size_t classes_;
  std::vector<nn::Linear<float>> layers_;
  std::vector<nn::Relu<float>> relus_;
  std::size_t steps_ = 0;
};

/// Index of the largest entry of each row (ties: lowest index).
std::vector<long> argmax_rows(const nn::Tensor& scores);

/// Trains an MLP on `train` and scores it on `test`. Labels must be < classes.
ClassifierResult mlp_classify(const LabeledSet& train, const LabeledSet& test, std::size_t classes,
                              const MlpConfig& config, nn::RngStream& rng);

/// mlp_classify with no hidden layer.
ClassifierResult linear_probe(const LabeledSet& train, const LabeledSet& test, std::size_t classes,
                              MlpConfig config, nn::RngStream& rng);

}  // namespace cortex::ablations
