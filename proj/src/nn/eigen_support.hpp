#pragma once

#include <Eigen/Core>

namespace cortex::nn::detail {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatView = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatView = Eigen::Map<const RowMat<T>>;

template <typename T>
MatView<T> view(T* data, Eigen::Index rows, Eigen::Index cols) {
  return MatView<T>(data, rows, cols);
}

template <typename T>
ConstMatView<T> view(const T* data, Eigen::Index rows, Eigen::Index cols) {
  return ConstMatView<T>(data, rows, cols);
}

template <typename T>
Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> row_vector(const T* data, Eigen::Index n) {
  return Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(data, n);
}

}  // namespace cortex::nn::detail
