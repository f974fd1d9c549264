#include "cortex/nn/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace cortex::nn {
namespace {

constexpr char kMagic[4] = {'E', 'E', 'G', 'T'};
// Guards against absurd headers from corrupt files.
constexpr std::uint32_t kMaxRank = 16;

template <typename U>
void put_le(std::ostream& out, U value) {
  unsigned char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xff);
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <typename U>
U get_le(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw DataError("truncated tensor stream");
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

Shape read_header(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("not an EEGT tensor (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kTensorFormatVersion) {
    throw DataError("unsupported EEGT version " + std::to_string(version));
  }
  const auto ndim = get_le<std::uint32_t>(in);
  if (ndim == 0 || ndim > kMaxRank) throw DataError("invalid EEGT rank " + std::to_string(ndim));
  Shape dims(ndim);
  for (auto& d : dims) {
    const auto v = get_le<std::uint64_t>(in);
    if (v == 0) throw DataError("EEGT dims must be positive");
    d = static_cast<std::size_t>(v);
  }
  return dims;
}

}  // namespace

void write_tensor(std::ostream& out, const Tensor& t) {
  if (t.rank() == 0) throw ShapeError("cannot serialize an empty tensor");
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, kTensorFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.dims()) put_le<std::uint64_t>(out, d);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(t.ptr()),
              static_cast<std::streamsize>(t.size() * sizeof(float)));
  } else {
    for (float v : t.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  if (!out) throw DataError("failed to write tensor");
}

Tensor read_tensor(std::istream& in) {
  Shape dims = read_header(in);
  const std::size_t n = shape_size(dims);
  std::vector<float> data(n);
  if constexpr (std::endian::native == std::endian::little) {
    if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n * sizeof(float)))) {
      throw DataError("truncated EEGT payload, expected " + std::to_string(n) + " floats");
    }
  } else {
    for (auto& v : data) v = std::bit_cast<float>(get_le<std::uint32_t>(in));
  }
  return Tensor(std::move(dims), std::move(data));
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_tensor(out, t);
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open tensor file " + path.string());
  try {
    return read_tensor(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Shape peek_tensor_dims(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open tensor file " + path.string());
  try {
    Shape dims = read_header(in);
    // Size check without reading the payload.
    const auto header_end = in.tellg();
    in.seekg(0, std::ios::end);
    const auto payload = static_cast<std::uint64_t>(in.tellg() - header_end);
    if (payload != shape_size(dims) * sizeof(float)) {
      throw DataError("payload size " + std::to_string(payload) + " bytes does not match dims " +
                      shape_string(dims));
    }
    return dims;
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string encode_tensor(const Tensor& t) {
  std::ostringstream out(std::ios::binary);
  write_tensor(out, t);
  return std::move(out).str();
}

Tensor decode_tensor(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  Tensor t = read_tensor(in);
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes after EEGT payload");
  return t;
}

}  // namespace cortex::nn
