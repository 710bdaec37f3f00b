#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dsk/tensor.hpp"

namespace dsk {

/// Spatial extent of a dense map. Positions flatten row-major: l = h * width + w.
struct Grid {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const noexcept { return height * width; }
  std::size_t index(std::size_t h, std::size_t w) const noexcept { return h * width + w; }
  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Channel-major C x H x W grid of finite f32 values.
///
/// The tag keeps feature maps (correspondence / metric / content features)
/// and style maps from being passed for one another.
template <class Tag>
class ChannelMap {
 public:
  ChannelMap(std::size_t channels, Grid grid, std::vector<float> values);

  /// Accepts a rank-3 f32 tensor [C, H, W]. Rejects non-finite values.
  static ChannelMap from_tensor(const Tensor& t);
  Tensor to_tensor() const;

  std::size_t channels() const noexcept { return channels_; }
  const Grid& grid() const noexcept { return grid_; }
  std::span<const float> values() const noexcept { return values_; }

  float at(std::size_t c, std::size_t h, std::size_t w) const noexcept {
    return values_[(c * grid_.height + h) * grid_.width + w];
  }

 private:
  std::size_t channels_;
  Grid grid_;
  std::vector<float> values_;
};

struct FeatureTag {};
struct StyleTag {};

using FeatureMap = ChannelMap<FeatureTag>;
using StyleMap = ChannelMap<StyleTag>;

extern template class ChannelMap<FeatureTag>;
extern template class ChannelMap<StyleTag>;

using ClassId = std::uint16_t;

/// Per-pixel class ids with `num_classes` classes; unlabeled pixels hold kIgnore.
class LabelMask {
 public:
  static constexpr ClassId kIgnore = 0xFFFF;

  LabelMask(Grid grid, std::size_t num_classes, std::vector<ClassId> ids);

  /// Accepts a rank-2 u16 tensor [H, W]. When `num_classes` is absent it is
  /// inferred as one past the largest labeled id.
  static LabelMask from_tensor(const Tensor& t, std::optional<std::size_t> num_classes = {});
  Tensor to_tensor() const;

  const Grid& grid() const noexcept { return grid_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::span<const ClassId> ids() const noexcept { return ids_; }
  ClassId at(std::size_t h, std::size_t w) const noexcept { return ids_[grid_.index(h, w)]; }

  /// Same pixels, larger vocabulary (for comparing masks with different inferred K).
  LabelMask with_num_classes(std::size_t num_classes) const;

 private:
  Grid grid_;
  std::size_t num_classes_;
  std::vector<ClassId> ids_;
};

}  // namespace dsk
