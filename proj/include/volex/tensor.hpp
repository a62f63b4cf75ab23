#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace volex {

// Dense row-major float32 tensor. This is the on-disk interchange type; the
// numerical modules work in double and convert at the boundary.
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  Tensor() = default;
  Tensor(std::vector<std::uint32_t> d, std::vector<float> values);
  static Tensor zeros(std::vector<std::uint32_t> d);

  std::size_t rank() const { return dims.size(); }
  std::size_t size() const { return data.size(); }

  bool operator==(const Tensor& other) const;
};

std::size_t element_count(std::span<const std::uint32_t> dims);

// "CAVT" container: magic, u8 version (1), u8 rank, u32 LE dims, f32 LE data.
inline constexpr char kTensorMagic[4] = {'C', 'A', 'V', 'T'};
inline constexpr std::uint8_t kTensorVersion = 1;

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor read_tensor(const std::filesystem::path& path);

// 64-bit FNV-1a, used for pinned artifact checksums.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t file_checksum(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

}  // namespace volex
