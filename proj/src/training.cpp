#include "cortex/training.hpp"

#include <numeric>

#include "cortex/errors.hpp"

namespace cortex {

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, nn::RngStream& rng,
                                                   bool shuffle) {
  if (batch_size == 0) throw ParameterError("batch size must be positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) rng.shuffle(order.begin(), order.end());
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  if (batches.size() > 1 && batches.back().size() == 1) {
    const std::size_t last = batches.back().front();
    batches.pop_back();
    batches.back().push_back(last);
  }
  return batches;
}

}  // namespace cortex
