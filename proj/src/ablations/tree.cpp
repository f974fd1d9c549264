#include "cortex/ablations/tree.hpp"

#include <algorithm>
#include <map>

#include "cortex/errors.hpp"

namespace cortex::ablations {
namespace {

long majority(const LabeledSet& train, const std::vector<std::size_t>& rows) {
  std::map<long, std::size_t> counts;
  for (std::size_t r : rows) ++counts[train.labels[r]];
  long best = counts.begin()->first;
  std::size_t n = 0;
  for (const auto& [label, c] : counts) {
    if (c > n) {
      best = label;
      n = c;
    }
  }
  return best;
}

// Gini from counts: 1 - sum (c/n)^2.
double gini_counts(const std::map<long, std::size_t>& counts, std::size_t n) {
  if (n == 0) return 0.0;
  double s = 0.0;
  for (const auto& [label, c] : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(n);
    s += p * p;
  }
  return 1.0 - s;
}

struct Split {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child impurity
};

Split best_split(const LabeledSet& train, const std::vector<std::size_t>& rows, double parent) {
  const std::size_t n = rows.size();
  Split best;
  best.impurity = parent;
  std::vector<std::pair<float, long>> column(n);
  for (std::size_t f = 0; f < train.dim(); ++f) {
    for (std::size_t i = 0; i < n; ++i) column[i] = {train.features.at(rows[i], f), train.labels[rows[i]]};
    std::sort(column.begin(), column.end());
    std::map<long, std::size_t> left;
    std::map<long, std::size_t> right;
    for (const auto& [v, label] : column) ++right[label];
    // Running sums of squared counts make each candidate O(1).
    double left_sq = 0.0;
    double right_sq = 0.0;
    for (const auto& [label, c] : right) right_sq += static_cast<double>(c) * static_cast<double>(c);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const long label = column[i].second;
      const double l = static_cast<double>(left[label]);
      const double r = static_cast<double>(right[label]);
      left_sq += 2.0 * l + 1.0;
      right_sq -= 2.0 * r - 1.0;
      ++left[label];
      --right[label];
      if (column[i].first == column[i + 1].first) continue;
      const double nl = static_cast<double>(i + 1);
      const double nr = static_cast<double>(n - i - 1);
      const double impurity = (nl * (1.0 - left_sq / (nl * nl)) + nr * (1.0 - right_sq / (nr * nr))) / static_cast<double>(n);
      if (impurity < best.impurity - 1e-12) {
        best.found = true;
        best.feature = f;
        best.threshold = 0.5 * (static_cast<double>(column[i].first) + static_cast<double>(column[i + 1].first));
        best.impurity = impurity;
      }
    }
  }
  return best;
}

}  // namespace

double gini(const std::vector<long>& labels) {
  std::map<long, std::size_t> counts;
  for (long l : labels) ++counts[l];
  return gini_counts(counts, labels.size());
}

std::size_t DecisionTree::build(const LabeledSet& train, std::vector<std::size_t>& rows, std::size_t depth) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({});
  nodes_[id].depth = depth;
  nodes_[id].label = majority(train, rows);
  std::map<long, std::size_t> counts;
  for (std::size_t r : rows) ++counts[train.labels[r]];
  const double parent = gini_counts(counts, rows.size());
  if (depth >= max_depth_ || counts.size() < 2) return id;
  const Split s = best_split(train, rows, parent);
  if (!s.found) return id;

  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  for (std::size_t r : rows) {
    (static_cast<double>(train.features.at(r, s.feature)) <= s.threshold ? left : right).push_back(r);
  }
  rows.clear();
  rows.shrink_to_fit();
  nodes_[id].leaf = false;
  nodes_[id].feature = s.feature;
  nodes_[id].threshold = s.threshold;
  const std::size_t l = build(train, left, depth + 1);
  const std::size_t r = build(train, right, depth + 1);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

void DecisionTree::fit(const LabeledSet& train, std::size_t max_depth) {
  train.validate();
  if (train.size() == 0) throw ParameterError("decision tree: empty training set");
  if (max_depth == 0) throw ParameterError("decision tree: max_depth must be at least 1");
  nodes_.clear();
  max_depth_ = max_depth;
  std::vector<std::size_t> rows(train.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  build(train, rows, 0);
}

long DecisionTree::predict(std::span<const float> x) const {
  if (nodes_.empty()) throw StateError("decision tree: predict before fit");
  std::size_t i = 0;
  while (!nodes_[i].leaf) {
    i = static_cast<double>(x[nodes_[i].feature]) <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
  }
  return nodes_[i].label;
}

std::vector<long> DecisionTree::predict(const nn::Tensor& features) const {
  std::vector<long> out;
  if (features.empty()) return out;
  for (std::size_t r = 0; r < features.dim(0); ++r) out.push_back(predict(features.row(r)));
  return out;
}

std::size_t DecisionTree::depth() const noexcept {
  std::size_t d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

ClassifierResult tree_classify(const LabeledSet& train, const LabeledSet& test, std::size_t max_depth) {
  test.validate();
  DecisionTree tree;
  tree.fit(train, max_depth);
  if (test.size() > 0 && test.dim() != train.dim()) throw ShapeError("tree: train and test widths differ");
  return score(test, tree.predict(test.features));
}

}  // namespace cortex::ablations
