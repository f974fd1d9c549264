#include "cortex/signal/pooled_set.hpp"

#include <algorithm>

#include "cortex/signal/pooling.hpp"

namespace cortex::signal {

PooledSet pool_dataset(const Dataset& dataset, std::size_t target_length) {
  PooledSet out;
  out.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& r = dataset.manifest().samples[i];
    out.push_back({i, r.subject, r.token_id, r.token_text,
                   adaptive_avg_pool(dataset.load_recording(i), target_length).values});
  }
  return out;
}

PooledSet pool_synthetic(const SyntheticGenerator& generator, std::size_t target_length) {
  PooledSet out;
  out.reserve(generator.size());
  for (std::size_t i = 0; i < generator.size(); ++i) {
    const auto& r = generator.manifest().samples[i];
    out.push_back({i, r.subject, r.token_id, r.token_text,
                   adaptive_avg_pool(generator.generate(i), target_length).values});
  }
  return out;
}

SampleView select_subjects(const PooledSet& set, const std::vector<std::string>& subjects) {
  SampleView out;
  for (const auto& s : set) {
    if (std::find(subjects.begin(), subjects.end(), s.subject) != subjects.end()) out.push_back(&s);
  }
  return out;
}

SampleView select_all(const PooledSet& set) {
  SampleView out;
  out.reserve(set.size());
  for (const auto& s : set) out.push_back(&s);
  return out;
}

}  // namespace cortex::signal
