#include "volex/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "volex/error.hpp"

namespace volex {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kBadMagic: return "bad_magic";
    case ErrorCode::kBadVersion: return "bad_version";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kIndexOutOfRange: return "index_out_of_range";
    case ErrorCode::kEmptyMesh: return "empty_mesh";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kEmptyVolume: return "empty_volume";
    case ErrorCode::kChannelMismatch: return "channel_mismatch";
    case ErrorCode::kEmptyDictionary: return "empty_dictionary";
    case ErrorCode::kZeroSeparation: return "zero_separation";
    case ErrorCode::kParse: return "parse";
  }
  return "unknown";
}

std::size_t element_count(std::span<const std::uint32_t> dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

Tensor::Tensor(std::vector<std::uint32_t> d, std::vector<float> values)
    : dims(std::move(d)), data(std::move(values)) {
  if (data.size() != element_count(dims)) {
    throw Error(ErrorCode::kShapeMismatch,
                "tensor data length does not match dims");
  }
}

Tensor Tensor::zeros(std::vector<std::uint32_t> d) {
  std::vector<float> values(element_count(d), 0.0f);
  return Tensor(std::move(d), std::move(values));
}

bool Tensor::operator==(const Tensor& other) const {
  if (dims != other.dims || data.size() != other.data.size()) return false;
  return data.empty() ||
         std::memcmp(data.data(), other.data.data(),
                     data.size() * sizeof(float)) == 0;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  if (t.dims.size() > 255) {
    throw Error(ErrorCode::kInvalidArgument, "tensor rank exceeds 255");
  }
  if (t.data.size() != element_count(t.dims)) {
    throw Error(ErrorCode::kShapeMismatch, "tensor data length does not match dims");
  }
  std::vector<std::uint8_t> out;
  out.reserve(6 + 4 * t.dims.size() + 4 * t.data.size());
  out.insert(out.end(), kTensorMagic, kTensorMagic + 4);
  out.push_back(kTensorVersion);
  out.push_back(static_cast<std::uint8_t>(t.dims.size()));
  for (auto d : t.dims) put_u32(out, d);
  for (float f : t.data) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kTensorMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "bad magic");
  }
  if (bytes.size() < 6) throw Error(ErrorCode::kTruncated, "truncated header");
  if (bytes[4] != kTensorVersion) {
    throw Error(ErrorCode::kBadVersion,
                "unsupported tensor version " + std::to_string(bytes[4]));
  }
  const std::size_t rank = bytes[5];
  std::size_t offset = 6;
  if (bytes.size() < offset + 4 * rank) throw Error(ErrorCode::kTruncated, "truncated dims");
  std::vector<std::uint32_t> dims(rank);
  for (std::size_t i = 0; i < rank; ++i, offset += 4) {
    dims[i] = get_u32(bytes.data() + offset);
    if (dims[i] == 0) throw Error(ErrorCode::kShapeMismatch, "zero tensor extent");
  }
  const std::size_t n = element_count(dims);
  if (bytes.size() - offset < 4 * n) throw Error(ErrorCode::kTruncated, "truncated payload");
  if (bytes.size() - offset > 4 * n) {
    throw Error(ErrorCode::kShapeMismatch, "trailing bytes after payload");
  }
  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i, offset += 4) {
    data[i] = std::bit_cast<float>(get_u32(bytes.data() + offset));
    if (!std::isfinite(data[i])) throw Error(ErrorCode::kNonFinite, "non-finite value");
  }
  return Tensor(std::move(dims), std::move(data));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  write_file_bytes(path, encode_tensor(t));
}

Tensor read_tensor(const std::filesystem::path& path) {
  return decode_tensor(read_file_bytes(path));
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
  return fnv1a64(read_file_bytes(path));
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace volex
