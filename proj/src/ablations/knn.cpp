#include "cortex/ablations/knn.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "cortex/errors.hpp"

namespace cortex::ablations {

ClassifierResult knn_classify(const LabeledSet& train, const LabeledSet& test, std::size_t k) {
  train.validate();
  test.validate();
  if (k == 0 || k > train.size()) {
    throw ParameterError("knn: k=" + std::to_string(k) + " must lie in [1, " + std::to_string(train.size()) + "]");
  }
  if (test.size() > 0 && test.dim() != train.dim()) throw ShapeError("knn: train and test widths differ");
  const std::size_t N = train.size();
  const std::size_t D = train.dim();
  std::vector<long> predictions;
  predictions.reserve(test.size());
  std::vector<std::pair<double, std::size_t>> dist(N);
  for (std::size_t q = 0; q < test.size(); ++q) {
    const auto x = test.features.row(q);
    for (std::size_t i = 0; i < N; ++i) {
      const auto y = train.features.row(i);
      double s = 0.0;
      for (std::size_t d = 0; d < D; ++d) {
        const double diff = static_cast<double>(x[d]) - static_cast<double>(y[d]);
        s += diff * diff;
      }
      dist[i] = {s, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::map<long, std::size_t> votes;
    for (std::size_t j = 0; j < k; ++j) ++votes[train.labels[dist[j].second]];
    long best = votes.begin()->first;
    std::size_t best_votes = 0;
    for (const auto& [label, v] : votes) {
      if (v > best_votes) {
        best = label;
        best_votes = v;
      }
    }
    predictions.push_back(best);
  }
  return score(test, std::move(predictions));
}

}  // namespace cortex::ablations
