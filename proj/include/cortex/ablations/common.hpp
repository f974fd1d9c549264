#pragma once

#include <cstddef>
#include <vector>

#include "cortex/metrics.hpp"
#include "cortex/nn/tensor.hpp"

namespace cortex::ablations {

/// Rows of `features` [N, D] with one integer label each.
struct LabeledSet {
  nn::Tensor features;
  std::vector<long> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const { return features.empty() ? 0 : features.dim(1); }
  /// Throws ShapeError when features and labels disagree.
  void validate() const;
};

struct ClassifierResult {
  std::vector<long> predictions;
  MetricsReport report;  ///< scored against the test labels
};

/// Scores `predictions` against `test.labels`.
ClassifierResult score(const LabeledSet& test, std::vector<long> predictions);

}  // namespace cortex::ablations
