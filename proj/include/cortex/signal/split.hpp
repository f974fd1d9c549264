#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cortex/nn/rng.hpp"

namespace cortex::signal {

/// Partition of the subject list into training subjects and masked (unseen)
/// subjects. `excluded` holds subjects a protocol leaves out entirely; it is
/// empty for leave-k-out splits. Each list keeps the original subject order.
struct SubjectSplit {
  std::vector<std::string> train;
  std::vector<std::string> masked;
  std::vector<std::string> excluded;

  std::size_t k() const noexcept { return masked.size(); }
  bool is_train(const std::string& subject) const;
  bool is_masked(const std::string& subject) const;
  /// Compact label such as "mask1[S04]".
  std::string tag() const;
};

/// Masks `k` subjects chosen by `rng`. Requires 1 <= k < subjects.size().
SubjectSplit make_split(const std::vector<std::string>& subjects, std::size_t k, nn::RngStream& rng);

/// Masks exactly the listed subjects.
SubjectSplit make_split(const std::vector<std::string>& subjects, const std::vector<std::string>& masked);

/// Picks `train_count` training and `test_count` masked subjects at random and
/// excludes the rest.
SubjectSplit make_protocol_split(const std::vector<std::string>& subjects, std::size_t train_count,
                                 std::size_t test_count, nn::RngStream& rng);

/// Throws DataError unless the three lists are disjoint and cover `subjects`.
void validate_split(const SubjectSplit& split, const std::vector<std::string>& subjects);

}  // namespace cortex::signal
