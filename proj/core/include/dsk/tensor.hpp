#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace dsk {

enum class DType : std::uint8_t {
  f32 = 1,
  u16 = 2,
};

std::string_view dtype_name(DType dtype) noexcept;
std::size_t dtype_size(DType dtype) noexcept;

/// Row-major n-dimensional array with a fixed element type.
///
/// The element count always equals the product of `dims()`, and every
/// extent is at least one. Construction validates both.
class Tensor {
 public:
  Tensor(std::vector<std::size_t> dims, std::vector<float> data);
  Tensor(std::vector<std::size_t> dims, std::vector<std::uint16_t> data);

  DType dtype() const noexcept;
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept;

  /// Typed views; throw std::logic_error on dtype mismatch.
  std::span<const float> f32() const;
  std::span<const std::uint16_t> u16() const;

  /// Raw little-endian-agnostic view of the element storage.
  std::span<const std::byte> bytes() const noexcept;

  /// Bitwise equality (NaN payloads compare by bits, not by value).
  friend bool operator==(const Tensor& a, const Tensor& b) noexcept;

 private:
  std::vector<std::size_t> dims_;
  std::variant<std::vector<float>, std::vector<std::uint16_t>> data_;
};

/// Product of extents; throws std::invalid_argument on an empty list, a
/// zero extent, or overflow.
std::size_t checked_element_count(std::span<const std::size_t> dims);

}  // namespace dsk
