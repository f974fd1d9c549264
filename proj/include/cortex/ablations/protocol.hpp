#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cortex/ablations/common.hpp"
#include "cortex/autoencoder.hpp"
#include "cortex/metrics.hpp"
#include "cortex/nn/rng.hpp"
#include "cortex/signal/split.hpp"

namespace cortex::ablations {

/// Repeated subject-level holdout: each repetition draws `train_subjects`
/// training and `test_subjects` test subjects at random.
struct ProtocolConfig {
  std::size_t train_subjects = 8;
  std::size_t test_subjects = 1;
  std::size_t repetitions = 3;
};

std::vector<signal::SubjectSplit> protocol_splits(const std::vector<std::string>& subjects,
                                                  const ProtocolConfig& config, nn::RngStream& rng);

/// Rows of `table` whose subject is listed, with token ids as labels.
LabeledSet labeled_rows(const LatentTable& table, const std::vector<std::string>& subjects);

struct AblationRow {
  std::string ablation;
  std::string setting;
  std::string repetition;  ///< "1", "2", ... or "mean"
  std::string split;
  MetricsReport report;
};

inline constexpr const char* kAblationHeader =
    "ablation,setting,repetition,split,accuracy,precision,recall,f1,true_cases,false_cases,n";

/// fn(train, test, setting index, rng) -> result
using ClassifierFn =
    std::function<ClassifierResult(const LabeledSet&, const LabeledSet&, std::size_t, nn::RngStream&)>;

/// Runs `fn` for every (setting, split) pair and appends one row per pair
/// plus a "mean" row per setting whose metrics are averaged over repetitions.
std::vector<AblationRow> run_protocol(const std::string& ablation, const LatentTable& table,
                                      const std::vector<signal::SubjectSplit>& splits,
                                      const std::vector<std::string>& settings, const ClassifierFn& fn,
                                      const nn::RngStream& rng);

/// Mean of the metrics in `rows`, counts summed.
MetricsReport average_reports(const std::vector<MetricsReport>& reports);

void write_ablation_csv(const std::filesystem::path& path, const std::vector<AblationRow>& rows);

}  // namespace cortex::ablations
