#include "dsk/maps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsk/error.hpp"

namespace dsk {

template <class Tag>
ChannelMap<Tag>::ChannelMap(std::size_t channels, Grid grid, std::vector<float> values)
    : channels_(channels), grid_(grid), values_(std::move(values)) {
  if (channels_ == 0 || grid_.height == 0 || grid_.width == 0) {
    throw ShapeError("channel map extents must be >= 1");
  }
  if (values_.size() != channels_ * grid_.size()) {
    throw ShapeError("channel map holds " + std::to_string(values_.size()) + " values, expected " +
                     std::to_string(channels_ * grid_.size()));
  }
  const auto bad = std::find_if(values_.begin(), values_.end(), [](float v) { return !std::isfinite(v); });
  if (bad != values_.end()) {
    throw DegenerateInputError("non-finite value at flat index " +
                               std::to_string(std::distance(values_.begin(), bad)));
  }
}

template <class Tag>
ChannelMap<Tag> ChannelMap<Tag>::from_tensor(const Tensor& t) {
  if (t.dtype() != DType::f32 || t.rank() != 3) {
    throw ShapeError("expected an f32 tensor of dims [C,H,W]");
  }
  const auto& d = t.dims();
  const auto v = t.f32();
  return ChannelMap(d[0], Grid{d[1], d[2]}, std::vector<float>(v.begin(), v.end()));
}

template <class Tag>
Tensor ChannelMap<Tag>::to_tensor() const {
  return Tensor({channels_, grid_.height, grid_.width}, values_);
}

template class ChannelMap<FeatureTag>;
template class ChannelMap<StyleTag>;

LabelMask::LabelMask(Grid grid, std::size_t num_classes, std::vector<ClassId> ids)
    : grid_(grid), num_classes_(num_classes), ids_(std::move(ids)) {
  if (grid_.height == 0 || grid_.width == 0) throw ShapeError("mask extents must be >= 1");
  if (ids_.size() != grid_.size()) {
    throw ShapeError("mask holds " + std::to_string(ids_.size()) + " ids, expected " +
                     std::to_string(grid_.size()));
  }
  if (num_classes_ > kIgnore) throw ShapeError("class count exceeds the u16 id range");
  for (std::size_t l = 0; l < ids_.size(); ++l) {
    if (ids_[l] != kIgnore && ids_[l] >= num_classes_) {
      throw DegenerateInputError("class id " + std::to_string(ids_[l]) + " at pixel " + std::to_string(l) +
                                 " is >= K = " + std::to_string(num_classes_));
    }
  }
}

LabelMask LabelMask::from_tensor(const Tensor& t, std::optional<std::size_t> num_classes) {
  if (t.dtype() != DType::u16 || t.rank() != 2) {
    throw ShapeError("expected a u16 tensor of dims [H,W]");
  }
  const auto v = t.u16();
  std::vector<ClassId> ids(v.begin(), v.end());
  std::size_t k = 0;
  if (num_classes) {
    k = *num_classes;
  } else {
    for (ClassId id : ids) {
      if (id != kIgnore) k = std::max<std::size_t>(k, std::size_t{id} + 1);
    }
  }
  return LabelMask(Grid{t.dims()[0], t.dims()[1]}, k, std::move(ids));
}

Tensor LabelMask::to_tensor() const {
  return Tensor({grid_.height, grid_.width}, ids_);
}

LabelMask LabelMask::with_num_classes(std::size_t num_classes) const {
  return LabelMask(grid_, num_classes, ids_);
}

}  // namespace dsk
