#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "cortex/autoencoder.hpp"
#include "cortex/nn/layers.hpp"
#include "cortex/nn/tensor.hpp"
#include "cortex/training.hpp"

namespace cortex {

// Latent -> token-embedding regressor:
//   3 x [Linear -> BatchNorm1d -> ReLU -> Dropout], widths 512, 1024, 2048,
//   then Linear(2048 -> embedding_dim) with no activation.

struct AlignmentConfig {
  std::size_t latent_dim = 64;
  std::size_t embedding_dim = 3584;
  std::array<std::size_t, 3> hidden{512, 1024, 2048};
  double dropout = 0.3;

  void validate() const;
};

/// Activations of one eval-mode pass, block by block.
template <typename T>
struct AlignmentTrace {
  std::vector<nn::BasicTensor<T>> blocks;  ///< d_1, d_2, d_3
  nn::BasicTensor<T> output;
};

template <typename T>
class AlignmentModel {
 public:
  AlignmentModel(const AlignmentConfig& config, nn::RngStream& init);

  const AlignmentConfig& config() const noexcept { return config_; }

  /// [B, latent_dim] -> [B, embedding_dim]. Train mode needs B >= 2 and an
  /// unfrozen model.
  nn::BasicTensor<T> forward(const nn::BasicTensor<T>& z, nn::Mode mode, nn::RngStream& rng);
  void backward(const nn::BasicTensor<T>& dy);

  /// Eval-mode forward; mutates nothing.
  nn::BasicTensor<T> infer(const nn::BasicTensor<T>& z) const;
  /// Eval-mode d_3, the input of the output layer: [B, hidden[2]].
  nn::BasicTensor<T> features(const nn::BasicTensor<T>& z) const;
  AlignmentTrace<T> trace(const nn::BasicTensor<T>& z) const;

  void freeze() noexcept { frozen_ = true; }
  bool frozen() const noexcept { return frozen_; }

  nn::ParameterRefs<T> parameters();
  std::vector<const nn::Parameter<T>*> parameters() const;

  nn::Linear<T>& linear(std::size_t i) { return linears_.at(i); }
  const nn::Linear<T>& linear(std::size_t i) const { return linears_.at(i); }
  nn::BatchNorm1d<T>& batchnorm(std::size_t i) { return norms_.at(i); }
  const nn::BatchNorm1d<T>& batchnorm(std::size_t i) const { return norms_.at(i); }
  /// Output layer (index 3 of linear()).
  const nn::Linear<T>& head() const { return linears_.back(); }

 private:
  nn::BasicTensor<T> as_batch(const nn::BasicTensor<T>& z) const;

  AlignmentConfig config_;
  std::vector<nn::Linear<T>> linears_;
  std::vector<nn::BatchNorm1d<T>> norms_;
  std::vector<nn::Relu<T>> relus_;
  std::vector<nn::Dropout<T>> dropouts_;
  bool frozen_ = false;
};

struct AlignmentTraining {
  AlignmentModel<float> model;
  std::vector<double> loss_history;  ///< mean train-mode MSE per epoch
};

/// Regresses each latent row onto row token_ids[i] of `embeddings` [V, E].
/// Throws DataError when a token id has no row.
AlignmentTraining train_alignment(const LatentTable& latents, const nn::Tensor& embeddings,
                                  const AlignmentConfig& config, const TrainOptions& options, nn::RngStream& rng,
                                  const EpochCallback& on_epoch = {});

/// Target matrix [N, E] gathered from `embeddings` by token id.
nn::Tensor gather_targets(const std::vector<std::size_t>& token_ids, const nn::Tensor& embeddings);

}  // namespace cortex
