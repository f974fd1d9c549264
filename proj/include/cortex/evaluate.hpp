#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "cortex/alignment.hpp"
#include "cortex/autoencoder.hpp"
#include "cortex/decode.hpp"
#include "cortex/metrics.hpp"
#include "cortex/nn/rng.hpp"
#include "cortex/signal/pooled_set.hpp"
#include "cortex/signal/split.hpp"

namespace cortex {

struct Prediction {
  std::size_t sample_id = 0;
  std::string subject;
  std::string predicted;  ///< generated text
  std::string truth;
  long predicted_id = -1;  ///< vocabulary id of `predicted`, -1 when none
  std::size_t truth_id = 0;
  Judgement judged = Judgement::false_case;
};

struct Evaluation {
  MetricsReport report;
  std::vector<Prediction> predictions;
};

/// pool -> encode -> align (eval) -> decode -> judge for every sample.
/// Throws DataError if a sample belongs to a training subject of `split` and
/// ParameterError if `samples` is empty. Backend failures are rethrown as
/// BackendError naming the sample.
Evaluation evaluate(const signal::SampleView& samples, const signal::SubjectSplit& split,
                    const Autoencoder<float>& autoencoder, const AlignmentModel<float>& alignment,
                    DecoderBackend& backend, const PromptSpec& prompt, const std::vector<std::string>& vocabulary);

/// Uniform random token per sample, scored like a model.
MetricsReport random_baseline(const std::vector<std::size_t>& truth_ids, std::size_t vocab_size, nn::RngStream& rng);

/// One JSON object per line: sample_id, subject, prediction, truth,
/// predicted_id, truth_id, judged ("true_case" | "false_case").
void write_predictions_jsonl(const std::filesystem::path& path, const std::vector<Prediction>& predictions);

}  // namespace cortex
