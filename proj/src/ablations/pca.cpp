#include "cortex/ablations/pca.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "cortex/errors.hpp"

namespace cortex::ablations {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

PcaProjection pca_2d(const nn::Tensor64& data) {
  if (data.rank() != 2) throw ShapeError("pca: expected [N, D], got " + nn::shape_string(data.dims()));
  const std::size_t N = data.dim(0);
  const std::size_t D = data.dim(1);
  if (N < 3) throw ParameterError("pca: need at least 3 samples, got " + std::to_string(N));
  if (D < 2) throw ParameterError("pca: need at least 2 features");

  Mat x = Eigen::Map<const Mat>(data.ptr(), static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(D));
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  Eigen::BDCSVD<Mat> svd(x, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const Mat v = svd.matrixV();

  PcaProjection out;
  out.mean.assign(mean.data(), mean.data() + D);
  out.components = nn::Tensor64({2, D});
  const double denom = static_cast<double>(N - 1);
  double total = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) total += s[i] * s[i] / denom;
  for (std::size_t c = 0; c < 2; ++c) {
    Eigen::VectorXd dir = v.col(static_cast<Eigen::Index>(c));
    Eigen::Index arg = 0;
    dir.cwiseAbs().maxCoeff(&arg);
    if (dir[arg] < 0.0) dir = -dir;
    for (std::size_t d = 0; d < D; ++d) out.components.at(c, d) = dir[static_cast<Eigen::Index>(d)];
    const double sv = static_cast<Eigen::Index>(c) < s.size() ? s[static_cast<Eigen::Index>(c)] : 0.0;
    out.explained_variance[c] = sv * sv / denom;
    out.explained_ratio[c] = total > 0.0 ? out.explained_variance[c] / total : 0.0;
  }
  const Mat comps = Eigen::Map<const Mat>(out.components.ptr(), 2, static_cast<Eigen::Index>(D));
  const Mat proj = x * comps.transpose();
  out.points = nn::Tensor64({N, 2});
  Eigen::Map<Mat>(out.points.ptr(), static_cast<Eigen::Index>(N), 2) = proj;
  return out;
}

PcaProjection pca_2d(const LatentTable& latents) {
  if (latents.size() < 3) throw ParameterError("pca: need at least 3 samples, got " + std::to_string(latents.size()));
  PcaProjection out = pca_2d(latents.latents.cast<double>());
  out.sample_ids = latents.sample_ids;
  out.subjects = latents.subjects;
  out.token_ids = latents.token_ids;
  return out;
}

void write_pca_csv(const std::filesystem::path& path, const PcaProjection& p) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "sample_id,subject,token_id,pc1,pc2\n";
  char buf[64];
  for (std::size_t i = 0; i < p.points.dim(0); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g", p.points.at(i, 0), p.points.at(i, 1));
    out << (i < p.sample_ids.size() ? std::to_string(p.sample_ids[i]) : std::to_string(i)) << ','
        << (i < p.subjects.size() ? p.subjects[i] : "") << ','
        << (i < p.token_ids.size() ? std::to_string(p.token_ids[i]) : "") << ',' << buf << '\n';
  }
}

void write_pca_svg(const std::filesystem::path& path, const PcaProjection& p) {
  constexpr double kSize = 480.0;
  constexpr double kMargin = 24.0;
  const std::size_t N = p.points.dim(0);
  double lo[2] = {p.points.at(0, 0), p.points.at(0, 1)};
  double hi[2] = {lo[0], lo[1]};
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      lo[c] = std::min(lo[c], p.points.at(i, c));
      hi[c] = std::max(hi[c], p.points.at(i, c));
    }
  }
  std::size_t classes = 1;
  for (std::size_t t : p.token_ids) classes = std::max(classes, t + 1);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
      << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"16\" font-size=\"12\">PC1 %.1f%%  PC2 %.1f%%</text>\n", kMargin,
                100.0 * p.explained_ratio[0], 100.0 * p.explained_ratio[1]);
  out << buf;
  const double span = kSize - 2.0 * kMargin;
  for (std::size_t i = 0; i < N; ++i) {
    const double u = hi[0] > lo[0] ? (p.points.at(i, 0) - lo[0]) / (hi[0] - lo[0]) : 0.5;
    const double w = hi[1] > lo[1] ? (p.points.at(i, 1) - lo[1]) / (hi[1] - lo[1]) : 0.5;
    const std::size_t token = i < p.token_ids.size() ? p.token_ids[i] : 0;
    const double hue = 360.0 * static_cast<double>(token) / static_cast<double>(classes);
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"hsl(%.1f,70%%,45%%)\"/>\n",
                  kMargin + u * span, kMargin + (1.0 - w) * span, hue);
    out << buf;
  }
  out << "</svg>\n";
}

}  // namespace cortex::ablations
