#include "cortex/alignment.hpp"

#include "cortex/errors.hpp"
#include "cortex/nn/loss.hpp"
#include "cortex/nn/optimizer.hpp"

namespace cortex {

using nn::BasicTensor;
using nn::Mode;

void AlignmentConfig::validate() const {
  if (latent_dim == 0 || embedding_dim == 0) throw ParameterError("alignment: dimensions must be positive");
  for (std::size_t h : hidden) {
    if (h == 0) throw ParameterError("alignment: hidden widths must be positive");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw ParameterError("alignment: dropout must lie in [0, 1)");
}

template <typename T>
AlignmentModel<T>::AlignmentModel(const AlignmentConfig& config, nn::RngStream& init) : config_(config) {
  config.validate();
  std::size_t in = config.latent_dim;
  linears_.reserve(4);
  norms_.reserve(3);
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string tag = "align.block" + std::to_string(i + 1);
    linears_.emplace_back(in, config.hidden[i], init, tag + ".linear");
    norms_.emplace_back(config.hidden[i], tag + ".bn");
    relus_.emplace_back();
    dropouts_.emplace_back(config.dropout);
    in = config.hidden[i];
  }
  linears_.emplace_back(in, config.embedding_dim, init, "align.out");
}

template <typename T>
BasicTensor<T> AlignmentModel<T>::as_batch(const BasicTensor<T>& z) const {
  if (z.rank() == 2 && z.dim(1) == config_.latent_dim) return z;
  throw ShapeError("alignment: expected [B, " + std::to_string(config_.latent_dim) + "], got " +
                   nn::shape_string(z.dims()));
}

template <typename T>
BasicTensor<T> AlignmentModel<T>::forward(const BasicTensor<T>& z, Mode mode, nn::RngStream& rng) {
  if (mode == Mode::train && frozen_) throw StateError("alignment: model is frozen");
  BasicTensor<T> h = as_batch(z);
  for (std::size_t i = 0; i < 3; ++i) {
    h = linears_[i].forward(h);
    h = norms_[i].forward(h, mode);
    h = relus_[i].forward(h);
    h = dropouts_[i].forward(h, mode, rng);
  }
  return linears_[3].forward(h);
}

template <typename T>
void AlignmentModel<T>::backward(const BasicTensor<T>& dy) {
  BasicTensor<T> g = linears_[3].backward(dy);
  for (std::size_t i = 3; i-- > 0;) {
    g = dropouts_[i].backward(g);
    g = relus_[i].backward(g);
    g = norms_[i].backward(g);
    g = linears_[i].backward(g, i > 0);
  }
}

template <typename T>
AlignmentTrace<T> AlignmentModel<T>::trace(const BasicTensor<T>& z) const {
  AlignmentTrace<T> out;
  BasicTensor<T> h = as_batch(z);
  for (std::size_t i = 0; i < 3; ++i) {
    h = nn::relu(norms_[i].infer(linears_[i].infer(h)));
    out.blocks.push_back(h);
  }
  out.output = linears_[3].infer(h);
  return out;
}

template <typename T>
BasicTensor<T> AlignmentModel<T>::features(const BasicTensor<T>& z) const {
  BasicTensor<T> h = as_batch(z);
  for (std::size_t i = 0; i < 3; ++i) h = nn::relu(norms_[i].infer(linears_[i].infer(h)));
  return h;
}

template <typename T>
BasicTensor<T> AlignmentModel<T>::infer(const BasicTensor<T>& z) const {
  return linears_[3].infer(features(z));
}

template <typename T>
nn::ParameterRefs<T> AlignmentModel<T>::parameters() {
  nn::ParameterRefs<T> out;
  for (std::size_t i = 0; i < 4; ++i) {
    out.push_back(&linears_[i].weight());
    out.push_back(&linears_[i].bias());
    if (i < 3) {
      out.push_back(&norms_[i].gamma());
      out.push_back(&norms_[i].beta());
    }
  }
  return out;
}

template <typename T>
std::vector<const nn::Parameter<T>*> AlignmentModel<T>::parameters() const {
  std::vector<const nn::Parameter<T>*> out;
  for (std::size_t i = 0; i < 4; ++i) {
    out.push_back(&linears_[i].weight());
    out.push_back(&linears_[i].bias());
    if (i < 3) {
      out.push_back(&norms_[i].gamma());
      out.push_back(&norms_[i].beta());
    }
  }
  return out;
}

template class AlignmentModel<float>;
template class AlignmentModel<double>;

nn::Tensor gather_targets(const std::vector<std::size_t>& token_ids, const nn::Tensor& embeddings) {
  if (embeddings.rank() != 2) throw ShapeError("embedding table must be [V, E]");
  const std::size_t V = embeddings.dim(0);
  const std::size_t E = embeddings.dim(1);
  if (token_ids.empty()) return {};
  nn::Tensor out({token_ids.size(), E});
  for (std::size_t i = 0; i < token_ids.size(); ++i) {
    if (token_ids[i] >= V) {
      throw DataError("no target embedding for token id " + std::to_string(token_ids[i]) + " (table has " +
                      std::to_string(V) + " rows)");
    }
    std::copy(embeddings.row(token_ids[i]).begin(), embeddings.row(token_ids[i]).end(), out.row(i).begin());
  }
  return out;
}

AlignmentTraining train_alignment(const LatentTable& latents, const nn::Tensor& embeddings,
                                  const AlignmentConfig& config, const TrainOptions& options, nn::RngStream& rng,
                                  const EpochCallback& on_epoch) {
  if (latents.size() < 2) throw ParameterError("train_alignment: need at least two samples");
  if (latents.dim() != config.latent_dim) {
    throw ShapeError("train_alignment: latents have width " + std::to_string(latents.dim()) + ", model expects " +
                     std::to_string(config.latent_dim));
  }
  if (embeddings.rank() != 2 || embeddings.dim(1) != config.embedding_dim) {
    throw ShapeError("train_alignment: embedding table " + nn::shape_string(embeddings.dims()) +
                     " does not have width " + std::to_string(config.embedding_dim));
  }
  const nn::Tensor targets = gather_targets(latents.token_ids, embeddings);

  nn::RngStream init = rng.fork(1);
  nn::RngStream order = rng.fork(2);
  nn::RngStream noise = rng.fork(3);
  AlignmentTraining result{AlignmentModel<float>(config, init), {}};
  auto& model = result.model;
  nn::Optimizer<float> opt(options.optimizer);
  opt.attach(model.parameters());

  const std::size_t D = config.latent_dim;
  const std::size_t E = config.embedding_dim;
  const std::size_t N = latents.size();
  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    double total = 0.0;
    for (const auto& batch : make_batches(N, options.batch_size, order)) {
      nn::Tensor z({batch.size(), D});
      nn::Tensor y({batch.size(), E});
      for (std::size_t b = 0; b < batch.size(); ++b) {
        std::copy(latents.latents.row(batch[b]).begin(), latents.latents.row(batch[b]).end(), z.row(b).begin());
        std::copy(targets.row(batch[b]).begin(), targets.row(batch[b]).end(), y.row(b).begin());
      }
      const nn::Tensor pred = model.forward(z, Mode::train, noise);
      auto loss = nn::mse_loss_with_grad(pred, y);
      model.backward(loss.grad);
      opt.step();
      total += static_cast<double>(loss.value) * static_cast<double>(batch.size());
    }
    const double mean = total / static_cast<double>(N);
    result.loss_history.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

}  // namespace cortex
