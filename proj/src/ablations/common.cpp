#include "cortex/ablations/common.hpp"

#include "cortex/errors.hpp"

namespace cortex::ablations {

void LabeledSet::validate() const {
  if (labels.empty() && features.empty()) return;
  if (features.rank() != 2 || features.dim(0) != labels.size()) {
    throw ShapeError("labeled set: features " + nn::shape_string(features.dims()) + " vs " +
                     std::to_string(labels.size()) + " labels");
  }
}

ClassifierResult score(const LabeledSet& test, std::vector<long> predictions) {
  ClassifierResult r;
  r.report = score_labels(test.labels, predictions);
  r.predictions = std::move(predictions);
  return r;
}

}  // namespace cortex::ablations
