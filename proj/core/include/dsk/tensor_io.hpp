#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "dsk/tensor.hpp"

namespace dsk {

// DST1 layout:
//   0..3   magic "DST1"
//   4      dtype code (1 = f32, 2 = u16)
//   5      rank n, 1 <= n <= 8
//   6..7   zero
//   8..    n little-endian u64 extents, then row-major little-endian data
inline constexpr std::byte kDst1Magic[4] = {std::byte{0x44}, std::byte{0x53}, std::byte{0x54},
                                            std::byte{0x31}};
inline constexpr std::size_t kDst1MaxRank = 8;
inline constexpr std::size_t kDst1FixedHeader = 8;

std::vector<std::byte> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::byte> bytes);

Tensor load_tensor(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it over `path`, so
/// a failed or interrupted save never leaves a truncated file behind.
void save_tensor(const Tensor& t, const std::filesystem::path& path);

std::vector<std::byte> read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace dsk
