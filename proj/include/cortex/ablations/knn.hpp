#pragma once

#include <cstddef>

#include "cortex/ablations/common.hpp"

namespace cortex::ablations {

/// Euclidean k-nearest-neighbour vote. Neighbours are ranked by (distance,
/// training index); a tied vote goes to the smallest label. Throws
/// ParameterError unless 1 <= k <= train.size().
ClassifierResult knn_classify(const LabeledSet& train, const LabeledSet& test, std::size_t k);

}  // namespace cortex::ablations
