#include "cortex/ablations/mlp.hpp"

#include "cortex/errors.hpp"
#include "cortex/nn/loss.hpp"
#include "cortex/nn/optimizer.hpp"

namespace cortex::ablations {

MlpClassifier::MlpClassifier(std::size_t input_dim, std::size_t classes, const MlpConfig& config, nn::RngStream& init)
    : config_(config), classes_(classes) {
  if (input_dim == 0 || classes == 0) throw ParameterError("mlp: input width and class count must be positive");
  std::size_t in = input_dim;
  layers_.reserve(config.hidden.size() + 1);
  for (std::size_t i = 0; i < config.hidden.size(); ++i) {
    layers_.emplace_back(in, config.hidden[i], init, "mlp.hidden" + std::to_string(i + 1));
    relus_.emplace_back();
    in = config.hidden[i];
  }
  layers_.emplace_back(in, classes, init, "mlp.out");
}

std::vector<double> MlpClassifier::fit(const LabeledSet& train, nn::RngStream& rng) {
  train.validate();
  if (train.size() == 0) throw ParameterError("mlp: empty training set");
  if (train.dim() != layers_.front().in_features()) throw ShapeError("mlp: feature width mismatch");
  std::vector<std::size_t> labels;
  for (long l : train.labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= classes_) {
      throw DataError("mlp: label " + std::to_string(l) + " outside [0, " + std::to_string(classes_) + ")");
    }
    labels.push_back(static_cast<std::size_t>(l));
  }
  nn::Optimizer<float> opt(config_.optimizer);
  nn::ParameterRefs<float> params;
  for (auto& l : layers_) {
    for (auto* p : l.parameters()) params.push_back(p);
  }
  opt.attach(params);

  const std::size_t D = train.dim();
  const std::size_t budget = config_.max_steps.value_or(0);
  std::vector<double> history;
  for (std::size_t epoch = 0; config_.max_steps ? steps_ < budget : epoch < config_.epochs; ++epoch) {
    double total = 0.0;
    std::size_t seen = 0;
    for (const auto& batch : make_batches(train.size(), config_.batch_size, rng)) {
      if (config_.max_steps && steps_ >= budget) break;
      nn::Tensor x({batch.size(), D});
      std::vector<std::size_t> y;
      for (std::size_t b = 0; b < batch.size(); ++b) {
        std::copy(train.features.row(batch[b]).begin(), train.features.row(batch[b]).end(), x.row(b).begin());
        y.push_back(labels[batch[b]]);
      }
      nn::Tensor h = x;
      for (std::size_t i = 0; i < layers_.size(); ++i) {
        h = layers_[i].forward(h);
        if (i < relus_.size()) h = relus_[i].forward(h);
      }
      auto loss = nn::softmax_cross_entropy(h, std::span<const std::size_t>(y));
      nn::Tensor g = loss.grad;
      for (std::size_t i = layers_.size(); i-- > 0;) {
        if (i < relus_.size()) g = relus_[i].backward(g);
        g = layers_[i].backward(g, i > 0);
      }
      opt.step();
      ++steps_;
      total += static_cast<double>(loss.value) * static_cast<double>(batch.size());
      seen += batch.size();
    }
    if (seen > 0) history.push_back(total / static_cast<double>(seen));
  }
  return history;
}

nn::Tensor MlpClassifier::logits(const nn::Tensor& features) const {
  nn::Tensor h = features;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].infer(h);
    if (i < relus_.size()) h = nn::relu(h);
  }
  return h;
}

nn::Tensor MlpClassifier::predict_proba(const nn::Tensor& features) const { return nn::softmax(logits(features)); }

std::vector<long> MlpClassifier::predict(const nn::Tensor& features) const {
  if (features.empty()) return {};
  return argmax_rows(logits(features));
}

std::vector<long> argmax_rows(const nn::Tensor& scores) {
  std::vector<long> out;
  if (scores.empty()) return out;
  for (std::size_t r = 0; r < scores.dim(0); ++r) {
    const auto row = scores.row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] > row[best]) best = c;
    }
    out.push_back(static_cast<long>(best));
  }
  return out;
}

ClassifierResult mlp_classify(const LabeledSet& train, const LabeledSet& test, std::size_t classes,
                              const MlpConfig& config, nn::RngStream& rng) {
  test.validate();
  if (train.size() == 0) throw ParameterError("mlp: empty training set");
  nn::RngStream init = rng.fork(1);
  nn::RngStream order = rng.fork(2);
  MlpClassifier model(train.dim(), classes, config, init);
  model.fit(train, order);
  return score(test, model.predict(test.features));
}

ClassifierResult linear_probe(const LabeledSet& train, const LabeledSet& test, std::size_t classes, MlpConfig config,
                              nn::RngStream& rng) {
  config.hidden.clear();
  return mlp_classify(train, test, classes, config, rng);
}

}  // namespace cortex::ablations
