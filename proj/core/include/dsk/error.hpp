#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dsk {

/// Malformed DST1 container. Each failure mode carries its own code so
/// callers (and tests) can tell them apart without string matching.
enum class FormatErrc {
  bad_magic,
  truncated,
  unknown_dtype,
  bad_dims,
  size_mismatch,
};

const char* to_string(FormatErrc code) noexcept;

class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  FormatErrc code() const noexcept { return code_; }

 private:
  FormatErrc code_;
};

/// Filesystem failure while reading or writing an artifact.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands whose channel counts or spatial extents do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inputs that are well-formed but leave the math undefined
/// (no shared classes, an all-zero mass vector, an absent class).
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A transport-plan column with zero total mass: the source position at
/// `column()` receives nothing from the exemplar.
class UnmatchedColumnError : public DegenerateInputError {
 public:
  explicit UnmatchedColumnError(std::size_t column)
      : DegenerateInputError("plan column " + std::to_string(column) + " has zero mass"),
        column_(column) {}

  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

}  // namespace dsk
