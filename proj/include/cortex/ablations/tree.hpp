#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cortex/ablations/common.hpp"

namespace cortex::ablations {

/// CART classifier with axis-aligned splits chosen by Gini impurity decrease.
/// Candidate thresholds are midpoints between consecutive distinct values; a
/// sample goes left when x[feature] <= threshold. A node becomes a leaf when
/// it is pure, at max_depth, or when no split lowers the impurity. Leaves
/// predict their majority label (ties: smallest label). Equal gains keep the
/// lowest feature, then the lowest threshold.
class DecisionTree {
 public:
  struct Node {
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    long label = 0;
    std::size_t depth = 0;
  };

  void fit(const LabeledSet& train, std::size_t max_depth);
  long predict(std::span<const float> x) const;
  std::vector<long> predict(const nn::Tensor& features) const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const noexcept;

 private:
  std::size_t build(const LabeledSet& train, std::vector<std::size_t>& rows, std::size_t depth);

  std::vector<Node> nodes_;
  std::size_t max_depth_ = 0;
};

/// Gini impurity 1 - sum p_c^2 of the given labels.
double gini(const std::vector<long>& labels);

ClassifierResult tree_classify(const LabeledSet& train, const LabeledSet& test, std::size_t max_depth);

}  // namespace cortex::ablations
