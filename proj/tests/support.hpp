#pragma once

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cortex/nn/layers.hpp"
#include "cortex/nn/tensor.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& stem = "cortex") {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            (stem + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// FNV-1a over the raw bytes of every parameter value.
template <typename Params>
std::uint64_t checksum(const Params& params) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto* p : params) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(p->value.ptr());
    for (std::size_t i = 0; i < p->value.size() * sizeof(*p->value.ptr()); ++i) {
      h = (h ^ bytes[i]) * 1099511628211ULL;
    }
  }
  return h;
}

inline cortex::nn::Tensor64 random_tensor64(cortex::nn::Shape dims, std::mt19937_64& g, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  cortex::nn::Tensor64 t(std::move(dims));
  for (auto& v : t.data()) v = n(g);
  return t;
}

inline double dot(const cortex::nn::Tensor64& a, const cortex::nn::Tensor64& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

struct GradReport {
  double worst = 0.0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t kinks = 0;
};

inline std::ostream& operator<<(std::ostream& os, const GradReport& r) {
  return os << r.checked << " coordinates, worst analytic " << r.worst_analytic << " vs numeric "
            << r.worst_numeric << ", " << r.kinks << " kink crossings skipped";
}

/// Central differences with step 1e-5 over up to `max_coords` coordinates of
/// `values` (all of them when the tensor is small). `loss` must recompute the
/// scalar from scratch.
inline void fd_check(cortex::nn::Tensor64& values, const cortex::nn::Tensor64& analytic,
                     const std::function<double()>& loss, GradReport& report, std::mt19937_64& g,
                     std::size_t max_coords = 64, bool skip_kinks = false) {
  constexpr double h = 1e-5;
  std::vector<std::size_t> coords(values.size());
  std::iota(coords.begin(), coords.end(), 0);
  if (coords.size() > max_coords) {
    std::shuffle(coords.begin(), coords.end(), g);
    coords.resize(max_coords);
  }
  for (std::size_t i : coords) {
    const double saved = values[i];
    values[i] = saved + h;
    const double up = loss();
    values[i] = saved - h;
    const double down = loss();
    values[i] = saved;
    const double numeric = (up - down) / (2 * h);
    if (skip_kinks) {
      // A ReLU switching inside [x-h, x+h] makes the two step sizes disagree.
      values[i] = saved + h / 2;
      const double half_up = loss();
      values[i] = saved - h / 2;
      const double half_down = loss();
      values[i] = saved;
      if (relative_error(numeric, (half_up - half_down) / h) > 1e-6) {
        ++report.kinks;
        continue;
      }
    }
    const double err = relative_error(analytic[i], numeric);
    if (err > report.worst) {
      report.worst = err;
      report.worst_analytic = analytic[i];
      report.worst_numeric = numeric;
    }
    ++report.checked;
  }
}

template <typename Params>
void zero_grads(Params params) {
  for (auto* p : params) p->zero_grad();
}

}  // namespace testing_support
