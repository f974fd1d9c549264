#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cortex/nn/layers.hpp"
#include "cortex/nn/tensor.hpp"
#include "cortex/signal/pooled_set.hpp"
#include "cortex/training.hpp"

namespace cortex {

// Convolutional autoencoder over pooled EEG.
//
//   encoder: Conv1d(C->64) ReLU  Conv1d(64->32) ReLU  Conv1d(32->16) ReLU
//            flatten(16 x L/8)  Linear(16*L/8 -> latent_dim)
//   decoder: Linear(latent_dim -> 16*L/8)  unflatten(16, L/8)
//            ConvT(16->32) ReLU  ConvT(32->64) ReLU  ConvT(64->C)
//
// Every convolution uses kernel 3, stride 2, padding 1; the transposed ones
// add output_padding 1 so each stage exactly doubles the length.

struct AutoencoderConfig {
  std::size_t input_channels = 128;
  std::size_t input_length = 256;  ///< must be divisible by 8
  std::size_t latent_dim = 64;

  void validate() const;
  std::size_t bottleneck_length() const { return input_length / 8; }
};

inline constexpr std::size_t kEncoderChannels[3] = {64, 32, 16};

template <typename T>
class Encoder {
 public:
  Encoder(const AutoencoderConfig& config, nn::RngStream& init);

  /// [B, C, L] or [C, L] -> [B, latent_dim] or [latent_dim]
  nn::BasicTensor<T> forward(const nn::BasicTensor<T>& x);
  void backward(const nn::BasicTensor<T>& dlatent);
  nn::BasicTensor<T> infer(const nn::BasicTensor<T>& x) const;

  nn::ParameterRefs<T> parameters();
  std::vector<const nn::Parameter<T>*> parameters() const;

  const nn::Conv1d<T>& conv(std::size_t i) const { return convs_.at(i); }
  const nn::Linear<T>& fc() const { return fc_; }

 private:
  AutoencoderConfig config_;
  std::vector<nn::Conv1d<T>> convs_;
  std::vector<nn::Relu<T>> relus_;
  nn::Linear<T> fc_;
  bool batched_ = true;
};

template <typename T>
class Decoder {
 public:
  Decoder(const AutoencoderConfig& config, nn::RngStream& init);

  /// [B, latent_dim] or [latent_dim] -> [B, C, L] or [C, L]
  nn::BasicTensor<T> forward(const nn::BasicTensor<T>& z);
  nn::BasicTensor<T> backward(const nn::BasicTensor<T>& dx);
  nn::BasicTensor<T> infer(const nn::BasicTensor<T>& z) const;

  nn::ParameterRefs<T> parameters();
  std::vector<const nn::Parameter<T>*> parameters() const;

 private:
  AutoencoderConfig config_;
  nn::Linear<T> fc_;
  std::vector<nn::ConvTranspose1d<T>> deconvs_;
  std::vector<nn::Relu<T>> relus_;
  bool batched_ = true;
};

/// Per-channel z-scoring fitted on the training subjects.
struct ChannelNormalizer {
  std::vector<float> mean;
  std::vector<float> stddev;

  static ChannelNormalizer fit(const signal::SampleView& samples);
  /// Identity normalizer for `channels` channels.
  static ChannelNormalizer identity(std::size_t channels);
  /// Writes the normalized [C, L] sample into `out` (C*L floats).
  template <typename T>
  void apply(const nn::Tensor& sample, T* out) const;
};

template <typename T>
struct Autoencoder {
  Autoencoder(const AutoencoderConfig& cfg, nn::RngStream& init)
      : config(cfg), encoder(cfg, init), decoder(cfg, init), normalizer(ChannelNormalizer::identity(cfg.input_channels)) {}

  AutoencoderConfig config;
  Encoder<T> encoder;
  Decoder<T> decoder;
  ChannelNormalizer normalizer;
  bool encoder_frozen = false;

  nn::ParameterRefs<T> parameters();
};

struct AutoencoderTraining {
  Autoencoder<float> model;
  std::vector<double> loss_history;  ///< mean reconstruction MSE per epoch
};

/// Fits the normalizer on `samples`, then minimizes the mean squared
/// reconstruction error. The returned encoder is marked frozen.
AutoencoderTraining train_autoencoder(const signal::SampleView& samples, const AutoencoderConfig& config,
                                      const TrainOptions& options, nn::RngStream& rng,
                                      const EpochCallback& on_epoch = {});

/// Rows of encoder outputs with their labels.
struct LatentTable {
  std::vector<std::size_t> sample_ids;
  std::vector<std::string> subjects;
  std::vector<std::size_t> token_ids;
  nn::Tensor latents;  ///< [N, latent_dim]; empty when N == 0

  std::size_t size() const noexcept { return sample_ids.size(); }
  std::size_t dim() const { return latents.rank() == 2 ? latents.dim(1) : 0; }
  /// Rows whose subject is in `subjects`, in table order.
  LatentTable select(const std::vector<std::string>& subjects) const;
};

/// Normalizes and encodes each sample on its own; never touches the decoder.
LatentTable extract_latents(const Autoencoder<float>& model, const signal::SampleView& samples);

/// Encodes a single pooled sample (normalization included).
nn::Tensor encode(const Autoencoder<float>& model, const nn::Tensor& pooled);

}  // namespace cortex
