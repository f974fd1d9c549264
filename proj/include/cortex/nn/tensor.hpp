#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cortex/errors.hpp"

namespace cortex::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& dims) noexcept;
std::string shape_string(const Shape& dims);

/// Dense row-major tensor. Owns its storage; copies are deep.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  explicit BasicTensor(Shape dims, T fill = T{0})
      : dims_(std::move(dims)), data_(shape_size(dims_), fill) {
    check_dims();
  }

  BasicTensor(Shape dims, std::vector<T> data) : dims_(std::move(dims)), data_(std::move(data)) {
    check_dims();
    if (data_.size() != shape_size(dims_)) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match dims " + shape_string(dims_));
    }
  }

  const Shape& dims() const noexcept { return dims_; }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t dim(std::size_t axis) const {
    if (axis >= dims_.size()) throw ShapeError("axis out of range for " + shape_string(dims_));
    return dims_[axis];
  }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  T* ptr() noexcept { return data_.data(); }
  const T* ptr() const noexcept { return data_.data(); }
  const std::vector<T>& values() const noexcept { return data_; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Rank-2 element access.
  T& at(std::size_t r, std::size_t c) noexcept { return data_[r * dims_[1] + c]; }
  const T& at(std::size_t r, std::size_t c) const noexcept { return data_[r * dims_[1] + c]; }

  /// Rank-3 element access.
  T& at(std::size_t a, std::size_t b, std::size_t c) noexcept {
    return data_[(a * dims_[1] + b) * dims_[2] + c];
  }
  const T& at(std::size_t a, std::size_t b, std::size_t c) const noexcept {
    return data_[(a * dims_[1] + b) * dims_[2] + c];
  }

  /// Row `r` of a tensor viewed as [dims[0], rest...].
  std::span<T> row(std::size_t r) noexcept {
    const std::size_t stride = dims_.empty() ? 0 : data_.size() / dims_[0];
    return std::span<T>(data_).subspan(r * stride, stride);
  }
  std::span<const T> row(std::size_t r) const noexcept {
    const std::size_t stride = dims_.empty() ? 0 : data_.size() / dims_[0];
    return std::span<const T>(data_).subspan(r * stride, stride);
  }

  void reshape(Shape dims) {
    if (shape_size(dims) != data_.size()) {
      throw ShapeError("cannot reshape " + shape_string(dims_) + " to " + shape_string(dims));
    }
    dims_ = std::move(dims);
    check_dims();
  }

  BasicTensor reshaped(Shape dims) const {
    BasicTensor out = *this;
    out.reshape(std::move(dims));
    return out;
  }

  void fill(T value) noexcept { std::fill(data_.begin(), data_.end(), value); }

  bool all_finite() const noexcept {
    for (T v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  template <typename U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return BasicTensor<U>(dims_, std::move(out));
  }

  bool operator==(const BasicTensor&) const = default;

 private:
  void check_dims() const {
    for (std::size_t d : dims_) {
      if (d == 0) throw ShapeError("tensor dims must be positive, got " + shape_string(dims_));
    }
  }

  Shape dims_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

/// Throws ShapeError unless `a` and `b` have identical dims.
template <typename T>
void require_same_shape(const BasicTensor<T>& a, const BasicTensor<T>& b, const char* what) {
  if (a.dims() != b.dims()) {
    throw ShapeError(std::string(what) + ": shape " + shape_string(a.dims()) + " vs " +
                     shape_string(b.dims()));
  }
}

}  // namespace cortex::nn
