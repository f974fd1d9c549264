#include "cortex/nn/layers.hpp"

#include <cmath>
#include <cstddef>

#include "eigen_support.hpp"

namespace cortex::nn {
namespace {

using detail::view;
using Index = Eigen::Index;

template <typename T>
void init_uniform(BasicTensor<T>& w, std::size_t fan_in, RngStream& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& v : w.data()) v = static_cast<T>(rng.uniform(-bound, bound));
}

struct SeqDims {
  std::size_t batch;
  std::size_t channels;
  std::size_t length;
  bool batched;
};

template <typename T>
SeqDims sequence_dims(const BasicTensor<T>& x, std::size_t channels, const char* layer) {
  SeqDims d{};
  if (x.rank() == 2) {
    d = {1, x.dim(0), x.dim(1), false};
  } else if (x.rank() == 3) {
    d = {x.dim(0), x.dim(1), x.dim(2), true};
  } else {
    throw ShapeError(std::string(layer) + ": expected [C, L] or [B, C, L], got " +
                     shape_string(x.dims()));
  }
  if (d.channels != channels) {
    throw ShapeError(std::string(layer) + ": input has " + std::to_string(d.channels) +
                     " channels, kernel expects " + std::to_string(channels));
  }
  return d;
}

inline std::ptrdiff_t signed_pos(std::size_t i, std::size_t stride, std::size_t k, std::size_t pad) {
  return static_cast<std::ptrdiff_t>(i * stride + k) - static_cast<std::ptrdiff_t>(pad);
}

}  // namespace

// ---------------------------------------------------------------- Conv1d

template <typename T>
Conv1d<T>::Conv1d(const Conv1dOptions& o, RngStream& init, const std::string& name)
    : options_(o),
      weight_(name + ".weight", {o.out_channels, o.in_channels, o.kernel}),
      bias_(name + ".bias", {o.out_channels}) {
  if (o.stride == 0 || o.kernel == 0) throw ParameterError("conv1d: stride and kernel must be positive");
  init_uniform(weight_.value, o.in_channels * o.kernel, init);
}

template <typename T>
std::size_t Conv1d<T>::output_length(std::size_t L) const {
  const auto span = static_cast<std::ptrdiff_t>(L + 2 * options_.padding) -
                    static_cast<std::ptrdiff_t>(options_.kernel);
  if (span < 0) {
    throw ShapeError("conv1d: input length " + std::to_string(L) + " too short for kernel " +
                     std::to_string(options_.kernel));
  }
  return static_cast<std::size_t>(span) / options_.stride + 1;
}

template <typename T>
BasicTensor<T> Conv1d<T>::run(const BasicTensor<T>& x, std::vector<T>& im) const {
  const SeqDims d = sequence_dims(x, options_.in_channels, "conv1d");
  const std::size_t K = options_.kernel;
  const std::size_t Lout = output_length(d.length);
  const std::size_t rows = d.channels * K;
  const std::size_t cols = d.batch * Lout;

  im.assign(rows * cols, T{0});
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t c = 0; c < d.channels; ++c) {
      const T* src = x.ptr() + (b * d.channels + c) * d.length;
      for (std::size_t k = 0; k < K; ++k) {
        T* dst = im.data() + (c * K + k) * cols + b * Lout;
        for (std::size_t o = 0; o < Lout; ++o) {
          const auto pos = signed_pos(o, options_.stride, k, options_.padding);
          if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(d.length)) dst[o] = src[pos];
        }
      }
    }
  }

  const std::size_t Cout = options_.out_channels;
  detail::RowMat<T> y(Cout, cols);
  y.noalias() = view(weight_.value.ptr(), Index(Cout), Index(rows)) * view(im.data(), Index(rows), Index(cols));

  BasicTensor<T> out(d.batched ? Shape{d.batch, Cout, Lout} : Shape{Cout, Lout});
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t co = 0; co < Cout; ++co) {
      const T bias = bias_.value[co];
      T* dst = out.ptr() + (b * Cout + co) * Lout;
      const T* src = y.data() + co * cols + b * Lout;
      for (std::size_t o = 0; o < Lout; ++o) dst[o] = src[o] + bias;
    }
  }

  return out;
}

template <typename T>
BasicTensor<T> Conv1d<T>::forward(const BasicTensor<T>& x) {
  BasicTensor<T> y = run(x, cols_);
  input_dims_ = x.dims();
  batch_ = x.rank() == 3 ? x.dim(0) : 1;
  input_length_ = x.dims().back();
  output_length_ = y.dims().back();
  has_forward_ = true;
  return y;
}

template <typename T>
BasicTensor<T> Conv1d<T>::infer(const BasicTensor<T>& x) const {
  std::vector<T> scratch;
  return run(x, scratch);
}

template <typename T>
BasicTensor<T> Conv1d<T>::backward(const BasicTensor<T>& dy, bool want_input_grad) {
  if (!has_forward_) throw StateError("conv1d: backward called without a recorded forward pass");
  has_forward_ = false;
  const std::size_t Cout = options_.out_channels;
  const std::size_t Cin = options_.in_channels;
  const std::size_t K = options_.kernel;
  const std::size_t Lout = output_length_;
  const std::size_t cols = batch_ * Lout;
  const std::size_t rows = Cin * K;
  if (dy.size() != Cout * cols) {
    throw ShapeError("conv1d: upstream gradient " + shape_string(dy.dims()) + " does not match output");
  }

  detail::RowMat<T> g(Cout, cols);
  for (std::size_t b = 0; b < batch_; ++b) {
    for (std::size_t co = 0; co < Cout; ++co) {
      const T* src = dy.ptr() + (b * Cout + co) * Lout;
      T* dst = g.data() + co * cols + b * Lout;
      for (std::size_t o = 0; o < Lout; ++o) dst[o] = src[o];
    }
  }
  const auto im = view(static_cast<const T*>(cols_.data()), Index(rows), Index(cols));
  view(weight_.grad.ptr(), Index(Cout), Index(rows)).noalias() += g * im.transpose();
  for (std::size_t co = 0; co < Cout; ++co) {
    const T* r = g.data() + co * cols;
    T acc{0};
    for (std::size_t c = 0; c < cols; ++c) acc += r[c];
    bias_.grad[co] += acc;
  }

  if (!want_input_grad) return {};
  detail::RowMat<T> dcols(rows, cols);
  dcols.noalias() = view(static_cast<const T*>(weight_.value.ptr()), Index(Cout), Index(rows)).transpose() * g;

  BasicTensor<T> dx(input_dims_);
  for (std::size_t b = 0; b < batch_; ++b) {
    for (std::size_t c = 0; c < Cin; ++c) {
      T* dst = dx.ptr() + (b * Cin + c) * input_length_;
      for (std::size_t k = 0; k < K; ++k) {
        const T* src = dcols.data() + (c * K + k) * cols + b * Lout;
        for (std::size_t o = 0; o < Lout; ++o) {
          const auto pos = signed_pos(o, options_.stride, k, options_.padding);
          if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(input_length_)) dst[pos] += src[o];
        }
      }
    }
  }
  return dx;
}

// ------------------------------------------------------- ConvTranspose1d

template <typename T>
ConvTranspose1d<T>::ConvTranspose1d(const ConvTranspose1dOptions& o, RngStream& init,
                                    const std::string& name)
    : options_(o),
      weight_(name + ".weight", {o.in_channels, o.out_channels, o.kernel}),
      bias_(name + ".bias", {o.out_channels}) {
  if (o.stride == 0 || o.kernel == 0) {
    throw ParameterError("conv_transpose1d: stride and kernel must be positive");
  }
  if (o.output_padding >= o.stride) {
    throw ParameterError("conv_transpose1d: output_padding (" + std::to_string(o.output_padding) +
                         ") must be smaller than stride (" + std::to_string(o.stride) + ")");
  }
  // fan_in as seen from an output position: in_channels * kernel.
  init_uniform(weight_.value, o.in_channels * o.kernel, init);
}

template <typename T>
std::size_t ConvTranspose1d<T>::output_length(std::size_t L) const {
  const auto n = static_cast<std::ptrdiff_t>((L - 1) * options_.stride + options_.kernel +
                                             options_.output_padding) -
                 static_cast<std::ptrdiff_t>(2 * options_.padding);
  if (L == 0 || n < 1) throw ShapeError("conv_transpose1d: non-positive output length");
  return static_cast<std::size_t>(n);
}

template <typename T>
BasicTensor<T> ConvTranspose1d<T>::run(const BasicTensor<T>& x, std::vector<T>& xm) const {
  const SeqDims d = sequence_dims(x, options_.in_channels, "conv_transpose1d");
  const std::size_t K = options_.kernel;
  const std::size_t Cin = options_.in_channels;
  const std::size_t Cout = options_.out_channels;
  const std::size_t Lout = output_length(d.length);
  const std::size_t cols = d.batch * d.length;

  xm.resize(Cin * cols);
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t c = 0; c < Cin; ++c) {
      const T* src = x.ptr() + (b * Cin + c) * d.length;
      std::copy(src, src + d.length, xm.data() + c * cols + b * d.length);
    }
  }

  detail::RowMat<T> spread(Cout * K, cols);
  spread.noalias() = view(static_cast<const T*>(weight_.value.ptr()), Index(Cin), Index(Cout * K)).transpose() *
                     view(static_cast<const T*>(xm.data()), Index(Cin), Index(cols));

  BasicTensor<T> out(d.batched ? Shape{d.batch, Cout, Lout} : Shape{Cout, Lout});
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t co = 0; co < Cout; ++co) {
      T* dst = out.ptr() + (b * Cout + co) * Lout;
      const T bias = bias_.value[co];
      for (std::size_t t = 0; t < Lout; ++t) dst[t] = bias;
      for (std::size_t k = 0; k < K; ++k) {
        const T* src = spread.data() + (co * K + k) * cols + b * d.length;
        for (std::size_t i = 0; i < d.length; ++i) {
          const auto pos = signed_pos(i, options_.stride, k, options_.padding);
          if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(Lout)) dst[pos] += src[i];
        }
      }
    }
  }

  return out;
}

template <typename T>
BasicTensor<T> ConvTranspose1d<T>::forward(const BasicTensor<T>& x) {
  BasicTensor<T> y = run(x, input_cols_);
  input_dims_ = x.dims();
  batch_ = x.rank() == 3 ? x.dim(0) : 1;
  input_length_ = x.dims().back();
  output_length_ = y.dims().back();
  has_forward_ = true;
  return y;
}

template <typename T>
BasicTensor<T> ConvTranspose1d<T>::infer(const BasicTensor<T>& x) const {
  std::vector<T> scratch;
  return run(x, scratch);
}

template <typename T>
BasicTensor<T> ConvTranspose1d<T>::backward(const BasicTensor<T>& dy, bool want_input_grad) {
  if (!has_forward_) throw StateError("conv_transpose1d: backward called without a recorded forward pass");
  has_forward_ = false;
  const std::size_t K = options_.kernel;
  const std::size_t Cin = options_.in_channels;
  const std::size_t Cout = options_.out_channels;
  const std::size_t L = input_length_;
  const std::size_t Lout = output_length_;
  const std::size_t cols = batch_ * L;
  if (dy.size() != batch_ * Cout * Lout) {
    throw ShapeError("conv_transpose1d: upstream gradient " + shape_string(dy.dims()) +
                     " does not match output");
  }

  detail::RowMat<T> gathered = detail::RowMat<T>::Zero(Cout * K, cols);
  for (std::size_t b = 0; b < batch_; ++b) {
    for (std::size_t co = 0; co < Cout; ++co) {
      const T* src = dy.ptr() + (b * Cout + co) * Lout;
      T bsum = 0;
      for (std::size_t t = 0; t < Lout; ++t) bsum += src[t];
      bias_.grad[co] += bsum;
      for (std::size_t k = 0; k < K; ++k) {
        T* dst = gathered.data() + (co * K + k) * cols + b * L;
        for (std::size_t i = 0; i < L; ++i) {
          const auto pos = signed_pos(i, options_.stride, k, options_.padding);
          if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(Lout)) dst[i] = src[pos];
        }
      }
    }
  }
  const auto xm = view(static_cast<const T*>(input_cols_.data()), Index(Cin), Index(cols));
  view(weight_.grad.ptr(), Index(Cin), Index(Cout * K)).noalias() += xm * gathered.transpose();

  if (!want_input_grad) return {};
  detail::RowMat<T> dxm(Cin, cols);
  dxm.noalias() = view(static_cast<const T*>(weight_.value.ptr()), Index(Cin), Index(Cout * K)) * gathered;
  BasicTensor<T> dx(input_dims_);
  for (std::size_t b = 0; b < batch_; ++b) {
    for (std::size_t c = 0; c < Cin; ++c) {
      const T* src = dxm.data() + c * cols + b * L;
      std::copy(src, src + L, dx.ptr() + (b * Cin + c) * L);
    }
  }
  return dx;
}

// ---------------------------------------------------------------- Linear

template <typename T>
Linear<T>::Linear(std::size_t in, std::size_t out, RngStream& init, const std::string& name)
    : weight_(name + ".weight", {out, in}), bias_(name + ".bias", {out}) {
  init_uniform(weight_.value, in, init);
}

namespace {

template <typename T>
std::size_t linear_batch(const BasicTensor<T>& x, std::size_t in, bool& vector_input) {
  if (x.rank() == 1) {
    vector_input = true;
    if (x.dim(0) != in) {
      throw ShapeError("linear: input has " + std::to_string(x.dim(0)) + " features, weight expects " +
                       std::to_string(in));
    }
    return 1;
  }
  if (x.rank() == 2) {
    vector_input = false;
    if (x.dim(1) != in) {
      throw ShapeError("linear: input has " + std::to_string(x.dim(1)) + " features, weight expects " +
                       std::to_string(in));
    }
    return x.dim(0);
  }
  throw ShapeError("linear: expected [F] or [B, F], got " + shape_string(x.dims()));
}

template <typename T>
BasicTensor<T> linear_apply(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& b) {
  bool vec = false;
  const std::size_t in = w.dim(1);
  const std::size_t out = w.dim(0);
  const std::size_t B = linear_batch(x, in, vec);
  BasicTensor<T> y(vec ? Shape{out} : Shape{B, out});
  auto ym = view(y.ptr(), Index(B), Index(out));
  ym.noalias() = view(x.ptr(), Index(B), Index(in)) * view(w.ptr(), Index(out), Index(in)).transpose();
  ym.rowwise() += detail::row_vector(b.ptr(), Index(out));
  return y;
}

}  // namespace

template <typename T>
BasicTensor<T> Linear<T>::forward(const BasicTensor<T>& x) {
  BasicTensor<T> y = linear_apply(x, weight_.value, bias_.value);
  input_ = x;
  vector_input_ = x.rank() == 1;
  has_forward_ = true;
  return y;
}

template <typename T>
BasicTensor<T> Linear<T>::infer(const BasicTensor<T>& x) const {
  return linear_apply(x, weight_.value, bias_.value);
}

template <typename T>
BasicTensor<T> Linear<T>::backward(const BasicTensor<T>& dy, bool want_input_grad) {
  if (!has_forward_) throw StateError("linear: backward called without a recorded forward pass");
  has_forward_ = false;
  const std::size_t in = in_features();
  const std::size_t out = out_features();
  const std::size_t B = vector_input_ ? 1 : input_.dim(0);
  if (dy.size() != B * out) {
    throw ShapeError("linear: upstream gradient " + shape_string(dy.dims()) + " does not match output");
  }
  const auto g = view(dy.ptr(), Index(B), Index(out));
  const auto xm = view(static_cast<const T*>(input_.ptr()), Index(B), Index(in));
  view(weight_.grad.ptr(), Index(out), Index(in)).noalias() += g.transpose() * xm;
  for (std::size_t b = 0; b < B; ++b) {
    const T* r = dy.ptr() + b * out;
    for (std::size_t o = 0; o < out; ++o) bias_.grad[o] += r[o];
  }
  if (!want_input_grad) return {};
  BasicTensor<T> dx(input_.dims());
  view(dx.ptr(), Index(B), Index(in)).noalias() =
      g * view(static_cast<const T*>(weight_.value.ptr()), Index(out), Index(in));
  return dx;
}

// ----------------------------------------------------------- BatchNorm1d

template <typename T>
BatchNorm1d<T>::BatchNorm1d(std::size_t features, const std::string& name, BatchNormOptions options)
    : options_(options),
      gamma_(name + ".gamma", {features}),
      beta_(name + ".beta", {features}),
      running_mean_({features}, T{0}),
      running_var_({features}, T{1}) {
  if (options.epsilon <= 0.0) throw ParameterError("batchnorm: epsilon must be positive");
  if (options.momentum < 0.0 || options.momentum > 1.0) {
    throw ParameterError("batchnorm: momentum must lie in [0, 1]");
  }
  gamma_.value.fill(T{1});
}

template <typename T>
void BatchNorm1d<T>::check_input(const BasicTensor<T>& x) const {
  if (x.rank() != 2 || x.dim(1) != features()) {
    throw ShapeError("batchnorm: expected [B, " + std::to_string(features()) + "], got " +
                     shape_string(x.dims()));
  }
}

template <typename T>
BasicTensor<T> BatchNorm1d<T>::forward(const BasicTensor<T>& x, Mode mode) {
  check_input(x);
  const std::size_t B = x.dim(0);
  const std::size_t F = features();
  if (mode == Mode::train && B < 2) {
    throw BatchSizeError("batchnorm: training mode needs a batch of at least 2, got " + std::to_string(B));
  }
  inv_std_.assign(F, T{0});
  xhat_ = BasicTensor<T>(x.dims());
  BasicTensor<T> y(x.dims());
  if (mode == Mode::train) {
    std::vector<double> mean(F, 0.0);
    std::vector<double> var(F, 0.0);
    for (std::size_t b = 0; b < B; ++b) {
      const T* r = x.ptr() + b * F;
      for (std::size_t f = 0; f < F; ++f) mean[f] += r[f];
    }
    for (auto& m : mean) m /= static_cast<double>(B);
    for (std::size_t b = 0; b < B; ++b) {
      const T* r = x.ptr() + b * F;
      for (std::size_t f = 0; f < F; ++f) {
        const double dlt = r[f] - mean[f];
        var[f] += dlt * dlt;
      }
    }
    const double m = options_.momentum;
    for (std::size_t f = 0; f < F; ++f) {
      const double biased = var[f] / static_cast<double>(B);
      const double unbiased = var[f] / static_cast<double>(B - 1);
      inv_std_[f] = static_cast<T>(1.0 / std::sqrt(biased + options_.epsilon));
      running_mean_[f] = static_cast<T>((1.0 - m) * running_mean_[f] + m * mean[f]);
      running_var_[f] = static_cast<T>((1.0 - m) * running_var_[f] + m * unbiased);
    }
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t f = 0; f < F; ++f) {
        const std::size_t i = b * F + f;
        xhat_[i] = static_cast<T>((x[i] - mean[f]) * inv_std_[f]);
        y[i] = gamma_.value[f] * xhat_[i] + beta_.value[f];
      }
    }
  } else {
    for (std::size_t f = 0; f < F; ++f) {
      inv_std_[f] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(running_var_[f]) + options_.epsilon));
    }
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t f = 0; f < F; ++f) {
        const std::size_t i = b * F + f;
        xhat_[i] = (x[i] - running_mean_[f]) * inv_std_[f];
        y[i] = gamma_.value[f] * xhat_[i] + beta_.value[f];
      }
    }
  }
  cached_mode_ = mode;
  has_forward_ = true;
  return y;
}

template <typename T>
BasicTensor<T> BatchNorm1d<T>::infer(const BasicTensor<T>& x) const {
  check_input(x);
  const std::size_t B = x.dim(0);
  const std::size_t F = features();
  BasicTensor<T> y(x.dims());
  for (std::size_t f = 0; f < F; ++f) {
    const T inv = static_cast<T>(1.0 / std::sqrt(static_cast<double>(running_var_[f]) + options_.epsilon));
    for (std::size_t b = 0; b < B; ++b) {
      const T xhat = (x[b * F + f] - running_mean_[f]) * inv;
      y[b * F + f] = gamma_.value[f] * xhat + beta_.value[f];
    }
  }
  return y;
}

template <typename T>
BasicTensor<T> BatchNorm1d<T>::backward(const BasicTensor<T>& dy) {
  if (!has_forward_) throw StateError("batchnorm: backward called without a recorded forward pass");
  has_forward_ = false;
  require_same_shape(dy, xhat_, "batchnorm backward");
  const std::size_t B = dy.dim(0);
  const std::size_t F = features();
  BasicTensor<T> dx(dy.dims());
  std::vector<double> sum_dy(F, 0.0);
  std::vector<double> sum_dy_xhat(F, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t f = 0; f < F; ++f) {
      const std::size_t i = b * F + f;
      sum_dy[f] += dy[i];
      sum_dy_xhat[f] += static_cast<double>(dy[i]) * xhat_[i];
    }
  }
  for (std::size_t f = 0; f < F; ++f) {
    gamma_.grad[f] += static_cast<T>(sum_dy_xhat[f]);
    beta_.grad[f] += static_cast<T>(sum_dy[f]);
  }
  if (cached_mode_ == Mode::eval) {
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t f = 0; f < F; ++f) {
        dx[b * F + f] = dy[b * F + f] * gamma_.value[f] * inv_std_[f];
      }
    }
    return dx;
  }
  const double n = static_cast<double>(B);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t f = 0; f < F; ++f) {
      const std::size_t i = b * F + f;
      const double g = static_cast<double>(gamma_.value[f]) * inv_std_[f] / n;
      dx[i] = static_cast<T>(g * (n * dy[i] - sum_dy[f] - xhat_[i] * sum_dy_xhat[f]));
    }
  }
  return dx;
}

// ---------------------------------------------------------- Relu/Dropout

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x) {
  BasicTensor<T> y = x;
  for (auto& v : y.data()) v = v > T{0} ? v : T{0};
  return y;
}

template <typename T>
BasicTensor<T> Relu<T>::forward(const BasicTensor<T>& x) {
  BasicTensor<T> y = x;
  mask_.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask_[i] = x[i] > T{0};
    if (!mask_[i]) y[i] = T{0};
  }
  dims_ = x.dims();
  has_forward_ = true;
  return y;
}

template <typename T>
BasicTensor<T> Relu<T>::backward(const BasicTensor<T>& dy) {
  if (!has_forward_) throw StateError("relu: backward called without a recorded forward pass");
  has_forward_ = false;
  if (dy.size() != mask_.size()) throw ShapeError("relu: gradient shape mismatch");
  BasicTensor<T> dx(dims_);
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = mask_[i] ? dy[i] : T{0};
  return dx;
}

namespace {
void check_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ParameterError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
}
}  // namespace

template <typename T>
Dropout<T>::Dropout(double rate) : rate_(rate) {
  check_rate(rate);
}

template <typename T>
BasicTensor<T> Dropout<T>::forward(const BasicTensor<T>& x, Mode mode, RngStream& rng) {
  dims_ = x.dims();
  has_forward_ = true;
  if (mode == Mode::eval || rate_ == 0.0) {
    scale_.assign(x.size(), T{1});
    return x;
  }
  const T keep = static_cast<T>(1.0 / (1.0 - rate_));
  scale_.resize(x.size());
  BasicTensor<T> y = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    scale_[i] = rng.uniform() < rate_ ? T{0} : keep;
    y[i] *= scale_[i];
  }
  return y;
}

template <typename T>
BasicTensor<T> Dropout<T>::backward(const BasicTensor<T>& dy) {
  if (!has_forward_) throw StateError("dropout: backward called without a recorded forward pass");
  has_forward_ = false;
  if (dy.size() != scale_.size()) throw ShapeError("dropout: gradient shape mismatch");
  BasicTensor<T> dx(dims_);
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * scale_[i];
  return dx;
}

template <typename T>
BasicTensor<T> dropout(const BasicTensor<T>& x, double rate, Mode mode, RngStream& rng) {
  Dropout<T> layer(rate);
  return layer.forward(x, mode, rng);
}

#define CORTEX_INSTANTIATE(T)                                                          \
  template class Conv1d<T>;                                                            \
  template class ConvTranspose1d<T>;                                                   \
  template class Linear<T>;                                                            \
  template class BatchNorm1d<T>;                                                       \
  template class Relu<T>;                                                              \
  template class Dropout<T>;                                                           \
  template BasicTensor<T> relu<T>(const BasicTensor<T>&);                              \
  template BasicTensor<T> dropout<T>(const BasicTensor<T>&, double, Mode, RngStream&);

CORTEX_INSTANTIATE(float)
CORTEX_INSTANTIATE(double)

#undef CORTEX_INSTANTIATE

}  // namespace cortex::nn
