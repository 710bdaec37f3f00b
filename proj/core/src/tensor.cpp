#include "dsk/tensor.hpp"

#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

#include "dsk/error.hpp"

namespace dsk {

const char* to_string(FormatErrc code) noexcept {
  switch (code) {
    case FormatErrc::bad_magic: return "bad magic";
    case FormatErrc::truncated: return "truncated";
    case FormatErrc::unknown_dtype: return "unknown dtype";
    case FormatErrc::bad_dims: return "bad dims";
    case FormatErrc::size_mismatch: return "size mismatch";
  }
  return "format error";
}

std::string_view dtype_name(DType dtype) noexcept {
  switch (dtype) {
    case DType::f32: return "f32";
    case DType::u16: return "u16";
  }
  return "?";
}

std::size_t dtype_size(DType dtype) noexcept {
  switch (dtype) {
    case DType::f32: return 4;
    case DType::u16: return 2;
  }
  return 0;
}

std::size_t checked_element_count(std::span<const std::size_t> dims) {
  if (dims.empty()) throw std::invalid_argument("tensor needs at least one dimension");
  std::size_t count = 1;
  for (std::size_t extent : dims) {
    if (extent == 0) throw std::invalid_argument("tensor extents must be >= 1");
    if (count > std::numeric_limits<std::size_t>::max() / extent) {
      throw std::invalid_argument("tensor element count overflows");
    }
    count *= extent;
  }
  return count;
}

namespace {

template <class T>
void check_count(const std::vector<std::size_t>& dims, const std::vector<T>& data) {
  const std::size_t expected = checked_element_count(dims);
  if (expected != data.size()) {
    throw std::invalid_argument("tensor dims describe " + std::to_string(expected) +
                                " elements but " + std::to_string(data.size()) + " were given");
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<float> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  check_count(dims_, std::get<std::vector<float>>(data_));
}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<std::uint16_t> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  check_count(dims_, std::get<std::vector<std::uint16_t>>(data_));
}

DType Tensor::dtype() const noexcept {
  return std::holds_alternative<std::vector<float>>(data_) ? DType::f32 : DType::u16;
}

std::size_t Tensor::size() const noexcept {
  return std::visit([](const auto& v) { return v.size(); }, data_);
}

std::span<const float> Tensor::f32() const {
  if (const auto* v = std::get_if<std::vector<float>>(&data_)) return *v;
  throw std::logic_error("tensor is u16, not f32");
}

std::span<const std::uint16_t> Tensor::u16() const {
  if (const auto* v = std::get_if<std::vector<std::uint16_t>>(&data_)) return *v;
  throw std::logic_error("tensor is f32, not u16");
}

std::span<const std::byte> Tensor::bytes() const noexcept {
  return std::visit([](const auto& v) { return std::as_bytes(std::span(v)); }, data_);
}

bool operator==(const Tensor& a, const Tensor& b) noexcept {
  if (a.dtype() != b.dtype() || a.dims_ != b.dims_) return false;
  const auto ab = a.bytes();
  const auto bb = b.bytes();
  return ab.size() == bb.size() && std::memcmp(ab.data(), bb.data(), ab.size()) == 0;
}

}  // namespace dsk
