#include "dsk/tensor_io.hpp"

#include <atomic>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <system_error>

#include <unistd.h>

#include "dsk/error.hpp"

namespace dsk {
namespace {

void put_le(std::vector<std::byte>& out, std::uint64_t value, std::size_t width) {
  for (std::size_t i = 0; i < width; ++i) {
    out.push_back(static_cast<std::byte>((value >> (8 * i)) & 0xFF));
  }
}

std::uint64_t get_le(std::span<const std::byte> in, std::size_t width) {
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < width; ++i) {
    value |= static_cast<std::uint64_t>(std::to_integer<std::uint8_t>(in[i])) << (8 * i);
  }
  return value;
}

}  // namespace

std::vector<std::byte> encode_tensor(const Tensor& t) {
  if (t.rank() > kDst1MaxRank) {
    throw FormatError(FormatErrc::bad_dims, "rank " + std::to_string(t.rank()) + " exceeds 8");
  }
  std::vector<std::byte> out;
  out.reserve(kDst1FixedHeader + 8 * t.rank() + t.size() * dtype_size(t.dtype()));
  out.insert(out.end(), std::begin(kDst1Magic), std::end(kDst1Magic));
  out.push_back(static_cast<std::byte>(t.dtype()));
  out.push_back(static_cast<std::byte>(t.rank()));
  out.push_back(std::byte{0});
  out.push_back(std::byte{0});
  for (std::size_t extent : t.dims()) put_le(out, extent, 8);

  if (t.dtype() == DType::f32) {
    for (float v : t.f32()) put_le(out, std::bit_cast<std::uint32_t>(v), 4);
  } else {
    for (std::uint16_t v : t.u16()) put_le(out, v, 2);
  }
  return out;
}

Tensor decode_tensor(std::span<const std::byte> bytes) {
  if (bytes.size() < kDst1FixedHeader) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kDst1Magic, 4) != 0) {
      throw FormatError(FormatErrc::bad_magic, "expected DST1");
    }
    throw FormatError(FormatErrc::truncated,
                      "header needs 8 bytes, file has " + std::to_string(bytes.size()));
  }
  if (std::memcmp(bytes.data(), kDst1Magic, 4) != 0) {
    throw FormatError(FormatErrc::bad_magic, "expected DST1");
  }
  const auto code = std::to_integer<std::uint8_t>(bytes[4]);
  if (code != static_cast<std::uint8_t>(DType::f32) && code != static_cast<std::uint8_t>(DType::u16)) {
    throw FormatError(FormatErrc::unknown_dtype, "code " + std::to_string(code));
  }
  const auto dtype = static_cast<DType>(code);
  const std::size_t rank = std::to_integer<std::uint8_t>(bytes[5]);
  if (rank < 1 || rank > kDst1MaxRank) {
    throw FormatError(FormatErrc::bad_dims, "rank " + std::to_string(rank));
  }
  const std::size_t header = kDst1FixedHeader + 8 * rank;
  if (bytes.size() < header) {
    throw FormatError(FormatErrc::truncated, "extent table incomplete");
  }

  std::vector<std::size_t> dims(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::uint64_t extent = get_le(bytes.subspan(kDst1FixedHeader + 8 * i), 8);
    if constexpr (sizeof(std::size_t) < sizeof(std::uint64_t)) {
      if (extent > SIZE_MAX) throw FormatError(FormatErrc::bad_dims, "extent too large");
    }
    dims[i] = static_cast<std::size_t>(extent);
  }
  std::size_t count = 0;
  try {
    count = checked_element_count(dims);
  } catch (const std::invalid_argument& e) {
    throw FormatError(FormatErrc::bad_dims, e.what());
  }

  const std::size_t elem = dtype_size(dtype);
  const std::size_t payload = bytes.size() - header;
  if (count > payload / elem) {
    throw FormatError(FormatErrc::truncated, "payload holds " + std::to_string(payload) +
                                                 " bytes, dims need " + std::to_string(count * elem));
  }
  if (payload != count * elem) {
    throw FormatError(FormatErrc::size_mismatch, "payload holds " + std::to_string(payload) +
                                                     " bytes, dims need " + std::to_string(count * elem));
  }

  const auto data = bytes.subspan(header);
  if (dtype == DType::f32) {
    std::vector<float> values(count);
    for (std::size_t i = 0; i < count; ++i) {
      values[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(data.subspan(4 * i), 4)));
    }
    return Tensor(std::move(dims), std::move(values));
  }
  std::vector<std::uint16_t> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = static_cast<std::uint16_t>(get_le(data.subspan(2 * i), 2));
  }
  return Tensor(std::move(dims), std::move(values));
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  if (end < 0) throw IoError("cannot size " + path.string());
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(static_cast<std::size_t>(end));
  if (!bytes.empty() && !in.read(reinterpret_cast<char*>(bytes.data()), end)) {
    throw IoError("short read on " + path.string());
  }
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  static std::atomic<unsigned> counter{0};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("write failed on " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

Tensor load_tensor(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_tensor(bytes);
}

void save_tensor(const Tensor& t, const std::filesystem::path& path) {
  const auto bytes = encode_tensor(t);
  write_file_atomic(path, bytes);
}

}  // namespace dsk
