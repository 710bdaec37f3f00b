#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "dsk/maps.hpp"

namespace dsk {

// Working precision. Maps are stored as f32; everything computed from them
// (dot products, norms, sums, Gram matrices, transport plans) is double.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1>;

/// C x HW matrix whose column l is the channel vector at position l = h*W + w.
template <class Tag>
Matrix flatten_spatial(const ChannelMap<Tag>& map);

/// Inverse of flatten_spatial. Values are rounded to f32.
template <class Tag>
ChannelMap<Tag> unflatten_spatial(const Matrix& flat, Grid grid);

/// Column-wise cosine similarity: entry (i, j) = cos(a_i, b_j), clipped at 0
/// when `clip_negative`. Columns with zero norm are similar to nothing (0).
Matrix cosine_similarity_matrix(const Matrix& a, const Matrix& b, bool clip_negative);

/// Row sums of the clipped cosine similarity matrix of (a, b), computed in
/// column blocks so the N x M matrix is never materialized.
Vector clipped_similarity_row_sums(const Matrix& a, const Matrix& b);

/// Columns scaled to unit L2 norm; zero columns stay zero.
Matrix normalize_columns(const Matrix& a);

/// K x HW indicator matrix; ignore pixels have an all-zero column.
Matrix one_hot(const LabelMask& mask);

/// Pixel count per class.
std::vector<std::size_t> class_areas(const LabelMask& mask);

/// Nearest-neighbor resize: output (h, w) reads source (floor(h*H/H'), floor(w*W/W')).
LabelMask resize_mask_nearest(const LabelMask& mask, Grid target);

}  // namespace dsk
