#include "cortex/evaluate.hpp"

#include <fstream>
#include <json.hpp>

#include "cortex/errors.hpp"

namespace cortex {

Evaluation evaluate(const signal::SampleView& samples, const signal::SubjectSplit& split,
                    const Autoencoder<float>& autoencoder, const AlignmentModel<float>& alignment,
                    DecoderBackend& backend, const PromptSpec& prompt, const std::vector<std::string>& vocabulary) {
  if (samples.empty()) throw ParameterError("evaluate: no samples in the evaluation split");
  prompt.validate();
  for (const auto* s : samples) {
    if (split.is_train(s->subject)) {
      throw DataError("evaluate: sample " + std::to_string(s->sample_id) + " belongs to training subject " +
                      s->subject);
    }
  }
  if (backend.embedding_dim() != alignment.config().embedding_dim) {
    throw BackendError("backend '" + backend.name() + "' expects embeddings of width " +
                       std::to_string(backend.embedding_dim()) + ", alignment produces " +
                       std::to_string(alignment.config().embedding_dim));
  }

  const LatentTable latents = extract_latents(autoencoder, samples);
  const nn::Tensor embeddings = alignment.infer(latents.latents);

  Evaluation out;
  std::vector<long> truth;
  std::vector<long> predicted;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = *samples[i];
    Generation g;
    try {
      g = backend.generate(embeddings.row(i), prompt);
    } catch (const BackendError& e) {
      throw BackendError("sample " + std::to_string(s.sample_id) + ": " + e.what());
    }
    Prediction p;
    p.sample_id = s.sample_id;
    p.subject = s.subject;
    p.predicted = g.text;
    p.truth = s.token_text;
    p.truth_id = s.token_id;
    p.judged = judge_case(g.text, s.token_text);
    if (p.judged == Judgement::true_case) {
      p.predicted_id = static_cast<long>(s.token_id);
    } else {
      for (std::size_t v = 0; v < vocabulary.size(); ++v) {
        if (vocabulary[v] == g.text && v != s.token_id) {
          p.predicted_id = static_cast<long>(v);
          break;
        }
      }
    }
    truth.push_back(static_cast<long>(p.truth_id));
    predicted.push_back(p.predicted_id);
    out.predictions.push_back(std::move(p));
  }
  out.report = score_labels(truth, predicted);
  return out;
}

MetricsReport random_baseline(const std::vector<std::size_t>& truth_ids, std::size_t vocab_size, nn::RngStream& rng) {
  if (vocab_size == 0) throw ParameterError("random baseline: vocabulary size must be positive");
  std::vector<long> truth(truth_ids.begin(), truth_ids.end());
  std::vector<long> predicted;
  predicted.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) predicted.push_back(static_cast<long>(rng.below(vocab_size)));
  return score_labels(truth, predicted);
}

void write_predictions_jsonl(const std::filesystem::path& path, const std::vector<Prediction>& predictions) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& p : predictions) {
    const nlohmann::json j = {{"sample_id", p.sample_id},
                              {"subject", p.subject},
                              {"prediction", p.predicted},
                              {"truth", p.truth},
                              {"predicted_id", p.predicted_id},
                              {"truth_id", p.truth_id},
                              {"judged", p.judged == Judgement::true_case ? "true_case" : "false_case"}};
    out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

}  // namespace cortex
