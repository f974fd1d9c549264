#include "cortex/autoencoder.hpp"

#include <cmath>

#include "cortex/errors.hpp"
#include "cortex/nn/loss.hpp"
#include "cortex/nn/optimizer.hpp"

namespace cortex {

using nn::BasicTensor;
using nn::Shape;
using nn::shape_string;

void AutoencoderConfig::validate() const {
  if (input_channels == 0 || latent_dim == 0) throw ParameterError("autoencoder: channels and latent_dim must be positive");
  if (input_length == 0 || input_length % 8 != 0) {
    throw ParameterError("autoencoder: input length must be a positive multiple of 8, got " +
                         std::to_string(input_length));
  }
}

// ---------------------------------------------------------------- Encoder

template <typename T>
Encoder<T>::Encoder(const AutoencoderConfig& config, nn::RngStream& init)
    : config_(config), relus_(3), fc_((config.validate(), kEncoderChannels[2] * config.bottleneck_length()),
                                      config.latent_dim, init, "encoder.fc") {
  std::size_t in = config.input_channels;
  convs_.reserve(3);
  for (std::size_t i = 0; i < 3; ++i) {
    nn::Conv1dOptions o{in, kEncoderChannels[i], 3, 2, 1};
    convs_.emplace_back(o, init, "encoder.conv" + std::to_string(i + 1));
    in = kEncoderChannels[i];
  }
}

namespace {

template <typename T>
BasicTensor<T> as_batch(const BasicTensor<T>& x, std::size_t channels, std::size_t length, bool& batched) {
  if (x.rank() == 2 && x.dim(0) == channels && x.dim(1) == length) {
    batched = false;
    return x.reshaped({1, channels, length});
  }
  if (x.rank() == 3 && x.dim(1) == channels && x.dim(2) == length) {
    batched = true;
    return x;
  }
  throw ShapeError("encoder: expected [" + std::to_string(channels) + "x" + std::to_string(length) +
                   "] input (optionally batched), got " + shape_string(x.dims()));
}

template <typename T>
BasicTensor<T> as_latent_batch(const BasicTensor<T>& z, std::size_t latent, bool& batched) {
  if (z.rank() == 1 && z.dim(0) == latent) {
    batched = false;
    return z.reshaped({1, latent});
  }
  if (z.rank() == 2 && z.dim(1) == latent) {
    batched = true;
    return z;
  }
  throw ShapeError("decoder: expected latent of width " + std::to_string(latent) + ", got " +
                   shape_string(z.dims()));
}

}  // namespace

template <typename T>
BasicTensor<T> Encoder<T>::forward(const BasicTensor<T>& x) {
  BasicTensor<T> h = as_batch(x, config_.input_channels, config_.input_length, batched_);
  const std::size_t B = h.dim(0);
  for (std::size_t i = 0; i < 3; ++i) h = relus_[i].forward(convs_[i].forward(h));
  h.reshape({B, h.size() / B});
  BasicTensor<T> z = fc_.forward(h);
  if (!batched_) z.reshape({config_.latent_dim});
  return z;
}

template <typename T>
void Encoder<T>::backward(const BasicTensor<T>& dlatent) {
  BasicTensor<T> g = dlatent.rank() == 1 ? dlatent.reshaped({1, dlatent.dim(0)}) : dlatent;
  const std::size_t B = g.dim(0);
  g = fc_.backward(g);
  g.reshape({B, kEncoderChannels[2], config_.bottleneck_length()});
  for (std::size_t i = 3; i-- > 0;) {
    g = relus_[i].backward(g);
    g = convs_[i].backward(g, i > 0);
  }
}

template <typename T>
BasicTensor<T> Encoder<T>::infer(const BasicTensor<T>& x) const {
  bool batched = true;
  BasicTensor<T> h = as_batch(x, config_.input_channels, config_.input_length, batched);
  const std::size_t B = h.dim(0);
  for (const auto& conv : convs_) h = nn::relu(conv.infer(h));
  h.reshape({B, h.size() / B});
  BasicTensor<T> z = fc_.infer(h);
  if (!batched) z.reshape({config_.latent_dim});
  return z;
}

template <typename T>
nn::ParameterRefs<T> Encoder<T>::parameters() {
  nn::ParameterRefs<T> out;
  for (auto& c : convs_) {
    out.push_back(&c.weight());
    out.push_back(&c.bias());
  }
  out.push_back(&fc_.weight());
  out.push_back(&fc_.bias());
  return out;
}

template <typename T>
std::vector<const nn::Parameter<T>*> Encoder<T>::parameters() const {
  std::vector<const nn::Parameter<T>*> out;
  for (const auto& c : convs_) {
    out.push_back(&c.weight());
    out.push_back(&c.bias());
  }
  out.push_back(&fc_.weight());
  out.push_back(&fc_.bias());
  return out;
}

// ---------------------------------------------------------------- Decoder

template <typename T>
Decoder<T>::Decoder(const AutoencoderConfig& config, nn::RngStream& init)
    : config_(config), fc_(config.latent_dim, (config.validate(), kEncoderChannels[2] * config.bottleneck_length()),
                           init, "decoder.fc"),
      relus_(2) {
  const std::size_t chans[4] = {kEncoderChannels[2], kEncoderChannels[1], kEncoderChannels[0], config.input_channels};
  deconvs_.reserve(3);
  for (std::size_t i = 0; i < 3; ++i) {
    nn::ConvTranspose1dOptions o{chans[i], chans[i + 1], 3, 2, 1, 1};
    deconvs_.emplace_back(o, init, "decoder.deconv" + std::to_string(i + 1));
  }
}

template <typename T>
BasicTensor<T> Decoder<T>::forward(const BasicTensor<T>& z) {
  BasicTensor<T> h = fc_.forward(as_latent_batch(z, config_.latent_dim, batched_));
  const std::size_t B = h.dim(0);
  h.reshape({B, kEncoderChannels[2], config_.bottleneck_length()});
  for (std::size_t i = 0; i < 3; ++i) {
    h = deconvs_[i].forward(h);
    if (i < 2) h = relus_[i].forward(h);
  }
  if (!batched_) h.reshape({config_.input_channels, config_.input_length});
  return h;
}

template <typename T>
BasicTensor<T> Decoder<T>::backward(const BasicTensor<T>& dx) {
  BasicTensor<T> g = dx.rank() == 2 ? dx.reshaped({1, dx.dim(0), dx.dim(1)}) : dx;
  const std::size_t B = g.dim(0);
  for (std::size_t i = 3; i-- > 0;) {
    if (i < 2) g = relus_[i].backward(g);
    g = deconvs_[i].backward(g);
  }
  g.reshape({B, g.size() / B});
  g = fc_.backward(g);
  if (!batched_) g.reshape({config_.latent_dim});
  return g;
}

template <typename T>
BasicTensor<T> Decoder<T>::infer(const BasicTensor<T>& z) const {
  bool batched = true;
  BasicTensor<T> h = fc_.infer(as_latent_batch(z, config_.latent_dim, batched));
  const std::size_t B = h.dim(0);
  h.reshape({B, kEncoderChannels[2], config_.bottleneck_length()});
  for (std::size_t i = 0; i < 3; ++i) {
    h = deconvs_[i].infer(h);
    if (i < 2) h = nn::relu(h);
  }
  if (!batched) h.reshape({config_.input_channels, config_.input_length});
  return h;
}

template <typename T>
nn::ParameterRefs<T> Decoder<T>::parameters() {
  nn::ParameterRefs<T> out{&fc_.weight(), &fc_.bias()};
  for (auto& d : deconvs_) {
    out.push_back(&d.weight());
    out.push_back(&d.bias());
  }
  return out;
}

template <typename T>
std::vector<const nn::Parameter<T>*> Decoder<T>::parameters() const {
  std::vector<const nn::Parameter<T>*> out{&fc_.weight(), &fc_.bias()};
  for (const auto& d : deconvs_) {
    out.push_back(&d.weight());
    out.push_back(&d.bias());
  }
  return out;
}

template <typename T>
nn::ParameterRefs<T> Autoencoder<T>::parameters() {
  nn::ParameterRefs<T> out = encoder.parameters();
  for (auto* p : decoder.parameters()) out.push_back(p);
  return out;
}

template class Encoder<float>;
template class Encoder<double>;
template class Decoder<float>;
template class Decoder<double>;
template struct Autoencoder<float>;
template struct Autoencoder<double>;

// ---------------------------------------------------------------- normalizer

ChannelNormalizer ChannelNormalizer::fit(const signal::SampleView& samples) {
  if (samples.empty()) throw ParameterError("normalizer: no samples to fit");
  const std::size_t C = samples.front()->values.dim(0);
  std::vector<double> sum(C, 0.0);
  std::vector<double> sq(C, 0.0);
  std::size_t count = 0;
  for (const auto* s : samples) {
    const auto& v = s->values;
    if (v.rank() != 2 || v.dim(0) != C) throw ShapeError("normalizer: inconsistent sample shapes");
    const std::size_t L = v.dim(1);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t t = 0; t < L; ++t) {
        const double x = v.at(c, t);
        sum[c] += x;
        sq[c] += x * x;
      }
    }
    count += L;
  }
  ChannelNormalizer out;
  out.mean.resize(C);
  out.stddev.resize(C);
  for (std::size_t c = 0; c < C; ++c) {
    const double m = sum[c] / static_cast<double>(count);
    const double var = std::max(0.0, sq[c] / static_cast<double>(count) - m * m);
    const double sd = std::sqrt(var);
    out.mean[c] = static_cast<float>(m);
    out.stddev[c] = sd > 1e-8 ? static_cast<float>(sd) : 1.0f;
  }
  return out;
}

ChannelNormalizer ChannelNormalizer::identity(std::size_t channels) {
  return {std::vector<float>(channels, 0.0f), std::vector<float>(channels, 1.0f)};
}

template <typename T>
void ChannelNormalizer::apply(const nn::Tensor& sample, T* out) const {
  if (sample.rank() != 2 || sample.dim(0) != mean.size()) {
    throw ShapeError("normalizer: sample " + shape_string(sample.dims()) + " does not match " +
                     std::to_string(mean.size()) + " channels");
  }
  const std::size_t C = sample.dim(0);
  const std::size_t L = sample.dim(1);
  for (std::size_t c = 0; c < C; ++c) {
    const float m = mean[c];
    const float inv = 1.0f / stddev[c];
    for (std::size_t t = 0; t < L; ++t) out[c * L + t] = static_cast<T>((sample.at(c, t) - m) * inv);
  }
}

template void ChannelNormalizer::apply<float>(const nn::Tensor&, float*) const;
template void ChannelNormalizer::apply<double>(const nn::Tensor&, double*) const;

// ---------------------------------------------------------------- training

namespace {

nn::Tensor gather_batch(const ChannelNormalizer& norm, const signal::SampleView& samples,
                        const std::vector<std::size_t>& idx, std::size_t C, std::size_t L) {
  nn::Tensor x({idx.size(), C, L});
  for (std::size_t b = 0; b < idx.size(); ++b) norm.apply(samples[idx[b]]->values, x.ptr() + b * C * L);
  return x;
}

void check_samples(const signal::SampleView& samples, const AutoencoderConfig& config) {
  for (const auto* s : samples) {
    if (s->values.rank() != 2 || s->values.dim(0) != config.input_channels ||
        s->values.dim(1) != config.input_length) {
      throw ShapeError("autoencoder: sample " + std::to_string(s->sample_id) + " has shape " +
                       shape_string(s->values.dims()) + ", expected [" + std::to_string(config.input_channels) +
                       "x" + std::to_string(config.input_length) + "]");
    }
  }
}

}  // namespace

AutoencoderTraining train_autoencoder(const signal::SampleView& samples, const AutoencoderConfig& config,
                                      const TrainOptions& options, nn::RngStream& rng, const EpochCallback& on_epoch) {
  if (samples.empty()) throw ParameterError("train_autoencoder: empty dataset");
  config.validate();
  check_samples(samples, config);

  nn::RngStream init = rng.fork(1);
  nn::RngStream order = rng.fork(2);
  AutoencoderTraining result{Autoencoder<float>(config, init), {}};
  auto& model = result.model;
  model.normalizer = ChannelNormalizer::fit(samples);

  nn::Optimizer<float> opt(options.optimizer);
  opt.attach(model.parameters());

  const std::size_t C = config.input_channels;
  const std::size_t L = config.input_length;
  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    double total = 0.0;
    for (const auto& batch : make_batches(samples.size(), options.batch_size, order)) {
      const nn::Tensor x = gather_batch(model.normalizer, samples, batch, C, L);
      const nn::Tensor z = model.encoder.forward(x);
      const nn::Tensor recon = model.decoder.forward(z);
      auto loss = nn::mse_loss_with_grad(recon, x);
      model.encoder.backward(model.decoder.backward(loss.grad));
      opt.step();
      total += static_cast<double>(loss.value) * static_cast<double>(batch.size());
    }
    const double mean = total / static_cast<double>(samples.size());
    result.loss_history.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  model.encoder_frozen = true;
  return result;
}

// ---------------------------------------------------------------- latents

LatentTable LatentTable::select(const std::vector<std::string>& wanted) const {
  LatentTable out;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < size(); ++i) {
    if (std::find(wanted.begin(), wanted.end(), subjects[i]) != wanted.end()) rows.push_back(i);
  }
  if (rows.empty()) return out;
  const std::size_t D = dim();
  out.latents = nn::Tensor({rows.size(), D});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = rows[r];
    out.sample_ids.push_back(sample_ids[i]);
    out.subjects.push_back(subjects[i]);
    out.token_ids.push_back(token_ids[i]);
    std::copy(latents.row(i).begin(), latents.row(i).end(), out.latents.row(r).begin());
  }
  return out;
}

LatentTable extract_latents(const Autoencoder<float>& model, const signal::SampleView& samples) {
  check_samples(samples, model.config);
  LatentTable table;
  if (samples.empty()) return table;
  const std::size_t D = model.config.latent_dim;
  table.latents = nn::Tensor({samples.size(), D});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const nn::Tensor z = encode(model, samples[i]->values);
    std::copy(z.values().begin(), z.values().end(), table.latents.ptr() + i * D);
  }
  for (const auto* s : samples) {
    table.sample_ids.push_back(s->sample_id);
    table.subjects.push_back(s->subject);
    table.token_ids.push_back(s->token_id);
  }
  return table;
}

nn::Tensor encode(const Autoencoder<float>& model, const nn::Tensor& pooled) {
  const std::size_t C = model.config.input_channels;
  const std::size_t L = model.config.input_length;
  if (pooled.rank() != 2 || pooled.dim(0) != C || pooled.dim(1) != L) {
    throw ShapeError("encode: expected [" + std::to_string(C) + "x" + std::to_string(L) + "], got " +
                     shape_string(pooled.dims()));
  }
  nn::Tensor x({C, L});
  model.normalizer.apply(pooled, x.ptr());
  return model.encoder.infer(x);
}

}  // namespace cortex
