#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "cortex/nn/tensor.hpp"

namespace cortex::nn {

// On-disk tensor format shared by every artifact in the repository:
//
//   bytes 0..3   "EEGT"
//   u32          version (1)
//   u32          ndim
//   u64 x ndim   dims
//   f32 x N      payload, row-major
//
// All integers and floats are little-endian regardless of host byte order.

inline constexpr std::uint32_t kTensorFormatVersion = 1;

void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

/// Reads only the header and returns the dims. Throws DataError on a bad file.
Shape peek_tensor_dims(const std::filesystem::path& path);

std::string encode_tensor(const Tensor& t);
Tensor decode_tensor(const std::string& bytes);

}  // namespace cortex::nn
