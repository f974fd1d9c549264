#include "cortex/nn/optimizer.hpp"

#include <cmath>

namespace cortex::nn {

template <typename T>
Optimizer<T>::Optimizer(OptimizerOptions options) : options_(options) {
  if (!(options.learning_rate > 0.0)) throw ParameterError("learning rate must be positive");
}

template <typename T>
void Optimizer<T>::attach(ParameterRefs<T> params) {
  params_ = std::move(params);
  first_moment_.clear();
  second_moment_.clear();
  if (options_.kind == OptimizerKind::adam) {
    for (const auto* p : params_) {
      first_moment_.emplace_back(p->value.dims());
      second_moment_.emplace_back(p->value.dims());
    }
  }
  step_ = 0;
  attached_ = true;
}

template <typename T>
void Optimizer<T>::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

template <typename T>
void Optimizer<T>::step() {
  if (!attached_) throw StateError("optimizer: step() before attach(); moment buffers are uninitialized");
  ++step_;
  const double lr = options_.learning_rate;
  if (options_.kind == OptimizerKind::sgd) {
    for (auto* p : params_) {
      require_same_shape(p->value, p->grad, "sgd step");
      for (std::size_t i = 0; i < p->value.size(); ++i) {
        p->value[i] -= static_cast<T>(lr * p->grad[i]);
      }
      p->zero_grad();
    }
    return;
  }
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const T step_size = static_cast<T>(lr / c1);
  const T inv_sqrt_c2 = static_cast<T>(1.0 / std::sqrt(c2));
  const T eps = static_cast<T>(options_.epsilon);
  const T tb1 = static_cast<T>(b1);
  const T tb2 = static_cast<T>(b2);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto* p = params_[k];
    auto& m = first_moment_[k];
    auto& v = second_moment_[k];
    if (m.dims() != p->value.dims() || p->grad.dims() != p->value.dims()) {
      throw StateError("optimizer: parameter " + p->name + " no longer matches its moment buffers");
    }
    T* w = p->value.ptr();
    T* g = p->grad.ptr();
    T* mp = m.ptr();
    T* vp = v.ptr();
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      mp[i] = tb1 * mp[i] + (T{1} - tb1) * g[i];
      vp[i] = tb2 * vp[i] + (T{1} - tb2) * g[i] * g[i];
      w[i] -= step_size * mp[i] / (std::sqrt(vp[i]) * inv_sqrt_c2 + eps);
      g[i] = T{0};
    }
  }
}

template class Optimizer<float>;
template class Optimizer<double>;

}  // namespace cortex::nn
