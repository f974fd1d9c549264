#include "cortex/ablations/finetune.hpp"

#include "cortex/ablations/mlp.hpp"
#include "cortex/errors.hpp"
#include "cortex/nn/loss.hpp"
#include "cortex/nn/optimizer.hpp"
#include "cortex/training.hpp"

namespace cortex::ablations {

template <typename T>
T head_objective(nn::Linear<T>& head, const nn::BasicTensor<T>& features, std::span<const std::size_t> labels,
                 HeadLoss loss, bool backprop) {
  const nn::BasicTensor<T> y = backprop ? head.forward(features) : head.infer(features);
  nn::LossValue<T> value;
  if (loss == HeadLoss::mse) {
    nn::BasicTensor<T> target(y.dims());
    for (std::size_t b = 0; b < labels.size(); ++b) target.at(b, labels[b]) = T{1};
    value = nn::mse_loss_with_grad(y, target);
  } else {
    value = nn::softmax_cross_entropy(y, labels);
  }
  if (backprop) head.backward(value.grad, false);
  return value.value;
}

template float head_objective<float>(nn::Linear<float>&, const nn::Tensor&, std::span<const std::size_t>, HeadLoss,
                                     bool);
template double head_objective<double>(nn::Linear<double>&, const nn::Tensor64&, std::span<const std::size_t>,
                                       HeadLoss, bool);

FinetuneResult finetune_head(const AlignmentModel<float>& backbone, const LabeledSet& latents, std::size_t classes,
                             const FinetuneConfig& config, nn::RngStream& rng) {
  if (!backbone.frozen()) throw StateError("finetune: the alignment backbone must be frozen first");
  latents.validate();
  if (latents.size() == 0) throw ParameterError("finetune: empty training set");
  std::vector<std::size_t> labels;
  for (long l : latents.labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= classes) throw DataError("finetune: label out of range");
    labels.push_back(static_cast<std::size_t>(l));
  }
  const nn::Tensor features = backbone.features(latents.features);
  const std::size_t F = features.dim(1);

  nn::RngStream init = rng.fork(1);
  nn::RngStream order = rng.fork(2);
  FinetuneResult result{nn::Linear<float>(F, classes, init, "head"), {}, 0};
  nn::Optimizer<float> opt(config.optimizer);
  opt.attach(result.head.parameters());

  const std::size_t budget = config.max_steps.value_or(0);
  for (std::size_t epoch = 0; config.max_steps ? result.steps < budget : epoch < config.epochs; ++epoch) {
    double total = 0.0;
    std::size_t seen = 0;
    for (const auto& batch : make_batches(latents.size(), config.batch_size, order)) {
      if (config.max_steps && result.steps >= budget) break;
      nn::Tensor x({batch.size(), F});
      std::vector<std::size_t> y;
      for (std::size_t b = 0; b < batch.size(); ++b) {
        std::copy(features.row(batch[b]).begin(), features.row(batch[b]).end(), x.row(b).begin());
        y.push_back(labels[batch[b]]);
      }
      const float loss = head_objective(result.head, x, std::span<const std::size_t>(y), config.loss, true);
      opt.step();
      ++result.steps;
      total += static_cast<double>(loss) * static_cast<double>(batch.size());
      seen += batch.size();
    }
    if (seen > 0) result.loss_history.push_back(total / static_cast<double>(seen));
  }
  return result;
}

std::vector<long> finetune_predict(const AlignmentModel<float>& backbone, const nn::Linear<float>& head,
                                   const nn::Tensor& latents) {
  if (latents.empty()) return {};
  return argmax_rows(head.infer(backbone.features(latents)));
}

}  // namespace cortex::ablations
