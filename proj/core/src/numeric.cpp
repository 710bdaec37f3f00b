#include "dsk/numeric.hpp"

#include <algorithm>
#include <string>

#include "dsk/error.hpp"

namespace dsk {

template <class Tag>
Matrix flatten_spatial(const ChannelMap<Tag>& map) {
  const std::size_t n = map.grid().size();
  Matrix out(static_cast<Eigen::Index>(map.channels()), static_cast<Eigen::Index>(n));
  const auto values = map.values();
  for (std::size_t c = 0; c < map.channels(); ++c) {
    for (std::size_t l = 0; l < n; ++l) {
      out(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(l)) = values[c * n + l];
    }
  }
  return out;
}

template <class Tag>
ChannelMap<Tag> unflatten_spatial(const Matrix& flat, Grid grid) {
  if (static_cast<std::size_t>(flat.cols()) != grid.size()) {
    throw ShapeError("flattened map has " + std::to_string(flat.cols()) + " columns, grid has " +
                     std::to_string(grid.size()) + " positions");
  }
  const std::size_t channels = static_cast<std::size_t>(flat.rows());
  const std::size_t n = grid.size();
  std::vector<float> values(channels * n);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t l = 0; l < n; ++l) {
      values[c * n + l] = static_cast<float>(flat(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(l)));
    }
  }
  return ChannelMap<Tag>(channels, grid, std::move(values));
}

template Matrix flatten_spatial(const FeatureMap&);
template Matrix flatten_spatial(const StyleMap&);
template FeatureMap unflatten_spatial<FeatureTag>(const Matrix&, Grid);
template StyleMap unflatten_spatial<StyleTag>(const Matrix&, Grid);

Matrix normalize_columns(const Matrix& a) {
  Matrix out = a;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double norm = out.col(j).norm();
    if (norm > 0.0) {
      out.col(j) /= norm;
    } else {
      out.col(j).setZero();
    }
  }
  return out;
}

namespace {

void check_channels(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("channel mismatch: " + std::to_string(a.rows()) + " vs " + std::to_string(b.rows()));
  }
}

}  // namespace

Matrix cosine_similarity_matrix(const Matrix& a, const Matrix& b, bool clip_negative) {
  check_channels(a, b);
  const Matrix an = normalize_columns(a);
  const Matrix bn = normalize_columns(b);
  Matrix sim = an.transpose() * bn;
  const double lo = clip_negative ? 0.0 : -1.0;
  return sim.cwiseMax(lo).cwiseMin(1.0);
}

Vector clipped_similarity_row_sums(const Matrix& a, const Matrix& b) {
  check_channels(a, b);
  constexpr Eigen::Index kBlock = 512;
  const Matrix an = normalize_columns(a);
  const Matrix bn = normalize_columns(b);
  Vector sums = Vector::Zero(a.cols());
  for (Eigen::Index start = 0; start < bn.cols(); start += kBlock) {
    const Eigen::Index width = std::min(kBlock, bn.cols() - start);
    const Matrix block = (an.transpose() * bn.middleCols(start, width)).cwiseMax(0.0).cwiseMin(1.0);
    sums += block.rowwise().sum();
  }
  return sums;
}

Matrix one_hot(const LabelMask& mask) {
  const auto ids = mask.ids();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(mask.num_classes()), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t l = 0; l < ids.size(); ++l) {
    if (ids[l] != LabelMask::kIgnore) out(ids[l], static_cast<Eigen::Index>(l)) = 1.0;
  }
  return out;
}

std::vector<std::size_t> class_areas(const LabelMask& mask) {
  std::vector<std::size_t> areas(mask.num_classes(), 0);
  for (ClassId id : mask.ids()) {
    if (id != LabelMask::kIgnore) ++areas[id];
  }
  return areas;
}

LabelMask resize_mask_nearest(const LabelMask& mask, Grid target) {
  if (target.height == 0 || target.width == 0) throw ShapeError("resize target extents must be >= 1");
  const Grid& src = mask.grid();
  std::vector<ClassId> ids(target.size());
  for (std::size_t h = 0; h < target.height; ++h) {
    const std::size_t sh = h * src.height / target.height;
    for (std::size_t w = 0; w < target.width; ++w) {
      const std::size_t sw = w * src.width / target.width;
      ids[target.index(h, w)] = mask.at(sh, sw);
    }
  }
  return LabelMask(target, mask.num_classes(), std::move(ids));
}

}  // namespace dsk
