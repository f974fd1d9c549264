#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cortex/nn/rng.hpp"
#include "cortex/nn/tensor.hpp"

namespace cortex::nn {

enum class Mode { train, eval };

/// A trainable tensor and its gradient accumulator.
template <typename T>
struct Parameter {
  Parameter() = default;
  Parameter(std::string n, Shape dims) : name(std::move(n)), value(dims), grad(dims) {}

  std::string name;
  BasicTensor<T> value;
  BasicTensor<T> grad;

  void zero_grad() { grad.fill(T{0}); }
};

template <typename T>
using ParameterRefs = std::vector<Parameter<T>*>;

// Layers accept either a single sample or a leading batch axis:
//   Conv1d / ConvTranspose1d : [C, L] or [B, C, L]
//   Linear                   : [F] or [B, F]
//   BatchNorm1d              : [B, F]
// forward() records what backward() needs; backward() consumes that record
// and accumulates into the parameter grads. infer() is const and records
// nothing, so a frozen layer can be shared by concurrent readers.
//
// Weights are initialized uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)), biases
// zero.

struct Conv1dOptions {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t padding = 0;
};

template <typename T>
class Conv1d {
 public:
  Conv1d(const Conv1dOptions& options, RngStream& init, const std::string& name = "conv");

  const Conv1dOptions& options() const noexcept { return options_; }
  /// floor((L + 2p - k) / s) + 1; throws ShapeError when that is < 1.
  std::size_t output_length(std::size_t input_length) const;

  BasicTensor<T> forward(const BasicTensor<T>& x);
  BasicTensor<T> backward(const BasicTensor<T>& dy, bool want_input_grad = true);
  BasicTensor<T> infer(const BasicTensor<T>& x) const;

  /// [out_channels, in_channels, kernel]
  Parameter<T>& weight() noexcept { return weight_; }
  const Parameter<T>& weight() const noexcept { return weight_; }
  Parameter<T>& bias() noexcept { return bias_; }
  const Parameter<T>& bias() const noexcept { return bias_; }
  ParameterRefs<T> parameters() { return {&weight_, &bias_}; }

 private:
  BasicTensor<T> run(const BasicTensor<T>& x, std::vector<T>& cols) const;

  Conv1dOptions options_;
  Parameter<T> weight_;
  Parameter<T> bias_;
  std::vector<T> cols_;
  Shape input_dims_;
  std::size_t batch_ = 0;
  std::size_t input_length_ = 0;
  std::size_t output_length_ = 0;
  bool has_forward_ = false;
};

struct ConvTranspose1dOptions {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t output_padding = 0;
};

template <typename T>
class ConvTranspose1d {
 public:
  /// Throws ParameterError when output_padding >= stride.
  ConvTranspose1d(const ConvTranspose1dOptions& options, RngStream& init,
                  const std::string& name = "deconv");

  const ConvTranspose1dOptions& options() const noexcept { return options_; }
  /// (L - 1) s - 2p + k + output_padding
  std::size_t output_length(std::size_t input_length) const;

  BasicTensor<T> forward(const BasicTensor<T>& x);
  BasicTensor<T> backward(const BasicTensor<T>& dy, bool want_input_grad = true);
  BasicTensor<T> infer(const BasicTensor<T>& x) const;

  /// [in_channels, out_channels, kernel]
  Parameter<T>& weight() noexcept { return weight_; }
  const Parameter<T>& weight() const noexcept { return weight_; }
  Parameter<T>& bias() noexcept { return bias_; }
  const Parameter<T>& bias() const noexcept { return bias_; }
  ParameterRefs<T> parameters() { return {&weight_, &bias_}; }

 private:
  BasicTensor<T> run(const BasicTensor<T>& x, std::vector<T>& input_cols) const;

  ConvTranspose1dOptions options_;
  Parameter<T> weight_;
  Parameter<T> bias_;
  std::vector<T> input_cols_;
  Shape input_dims_;
  std::size_t batch_ = 0;
  std::size_t input_length_ = 0;
  std::size_t output_length_ = 0;
  bool has_forward_ = false;
};

template <typename T>
class Linear {
 public:
  Linear(std::size_t in_features, std::size_t out_features, RngStream& init,
         const std::string& name = "linear");

  std::size_t in_features() const noexcept { return weight_.value.dim(1); }
  std::size_t out_features() const noexcept { return weight_.value.dim(0); }

  BasicTensor<T> forward(const BasicTensor<T>& x);
  BasicTensor<T> backward(const BasicTensor<T>& dy, bool want_input_grad = true);
  BasicTensor<T> infer(const BasicTensor<T>& x) const;

  /// [out_features, in_features]
  Parameter<T>& weight() noexcept { return weight_; }
  const Parameter<T>& weight() const noexcept { return weight_; }
  Parameter<T>& bias() noexcept { return bias_; }
  const Parameter<T>& bias() const noexcept { return bias_; }
  ParameterRefs<T> parameters() { return {&weight_, &bias_}; }

 private:
  Parameter<T> weight_;
  Parameter<T> bias_;
  BasicTensor<T> input_;
  bool vector_input_ = false;
  bool has_forward_ = false;
};

struct BatchNormOptions {
  double momentum = 0.1;
  double epsilon = 1e-5;
};

/// Normalizes each feature over the batch (train) or with running statistics
/// (eval), then applies the affine scale/shift. Running variance is updated
/// with the unbiased batch variance.
template <typename T>
class BatchNorm1d {
 public:
  BatchNorm1d(std::size_t features, const std::string& name = "bn",
              BatchNormOptions options = {});

  std::size_t features() const noexcept { return gamma_.value.size(); }
  const BatchNormOptions& options() const noexcept { return options_; }

  BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode);
  BasicTensor<T> backward(const BasicTensor<T>& dy);
  BasicTensor<T> infer(const BasicTensor<T>& x) const;

  Parameter<T>& gamma() noexcept { return gamma_; }
  const Parameter<T>& gamma() const noexcept { return gamma_; }
  Parameter<T>& beta() noexcept { return beta_; }
  const Parameter<T>& beta() const noexcept { return beta_; }
  BasicTensor<T>& running_mean() noexcept { return running_mean_; }
  const BasicTensor<T>& running_mean() const noexcept { return running_mean_; }
  BasicTensor<T>& running_var() noexcept { return running_var_; }
  const BasicTensor<T>& running_var() const noexcept { return running_var_; }
  ParameterRefs<T> parameters() { return {&gamma_, &beta_}; }

 private:
  void check_input(const BasicTensor<T>& x) const;

  BatchNormOptions options_;
  Parameter<T> gamma_;
  Parameter<T> beta_;
  BasicTensor<T> running_mean_;
  BasicTensor<T> running_var_;
  BasicTensor<T> xhat_;
  std::vector<T> inv_std_;
  Mode cached_mode_ = Mode::eval;
  bool has_forward_ = false;
};

template <typename T>
class Relu {
 public:
  BasicTensor<T> forward(const BasicTensor<T>& x);
  BasicTensor<T> backward(const BasicTensor<T>& dy);

 private:
  std::vector<unsigned char> mask_;
  Shape dims_;
  bool has_forward_ = false;
};

/// Inverted dropout: survivors are scaled by 1 / (1 - rate) at train time so
/// that eval mode is the identity.
template <typename T>
class Dropout {
 public:
  explicit Dropout(double rate);

  double rate() const noexcept { return rate_; }
  BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode, RngStream& rng);
  BasicTensor<T> backward(const BasicTensor<T>& dy);

 private:
  double rate_;
  std::vector<T> scale_;
  Shape dims_;
  bool has_forward_ = false;
};

/// Elementwise max(0, x).
template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x);

/// Stateless dropout; throws ParameterError unless 0 <= rate < 1.
template <typename T>
BasicTensor<T> dropout(const BasicTensor<T>& x, double rate, Mode mode, RngStream& rng);

}  // namespace cortex::nn
