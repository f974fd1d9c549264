#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "cortex/autoencoder.hpp"
#include "cortex/nn/tensor.hpp"

namespace cortex::ablations {

/// Top-2 principal directions of a data matrix. Each component's
/// largest-magnitude loading is positive.
struct PcaProjection {
  nn::Tensor64 components;                 ///< [2, D], orthonormal rows
  std::array<double, 2> explained_variance{};  ///< sample variance (N - 1 denominator)
  std::array<double, 2> explained_ratio{};     ///< share of the total variance
  std::vector<double> mean;                ///< [D]
  nn::Tensor64 points;                     ///< [N, 2] projected centered data
  std::vector<std::size_t> sample_ids;
  std::vector<std::string> subjects;
  std::vector<std::size_t> token_ids;
};

/// Throws ParameterError for fewer than 3 rows or fewer than 2 columns.
PcaProjection pca_2d(const nn::Tensor64& data);
PcaProjection pca_2d(const LatentTable& latents);

/// sample_id,subject,token_id,pc1,pc2
void write_pca_csv(const std::filesystem::path& path, const PcaProjection& p);
/// Scatter plot, one colour per token.
void write_pca_svg(const std::filesystem::path& path, const PcaProjection& p);

}  // namespace cortex::ablations
