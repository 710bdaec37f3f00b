#pragma once

#include <optional>

#include "dsk/maps.hpp"
#include "dsk/numeric.hpp"
#include "dsk/sinkhorn.hpp"

namespace dsk {

/// C[i, j] = 1 - max(cos(exemplar_i, source_j), 0); entries in [0, 1].
Matrix build_cost(const Matrix& exemplar_features, const Matrix& source_features);

Vector uniform_masses(std::size_t n);

/// Exemplar pixel of class k gets area_source(k) / area_exemplar(k), then the
/// vector is divided by its sum. Ignore pixels and classes missing from the
/// source get zero. Throws DegenerateInputError when nothing is shared.
Vector masses_from_labels(const LabelMask& exemplar_mask, const LabelMask& source_mask);

/// Label-free estimate of the same ratio: each exemplar position's summed
/// clipped similarity to the source over its summed clipped similarity to
/// the exemplar itself, divided by the total. Zero-norm exemplar columns get
/// zero mass.
Vector masses_from_features(const Matrix& exemplar_features, const Matrix& source_features);

/// Barycentric projection of exemplar payload columns onto source positions:
/// out[:, j] = sum_i payload[:, i] A[i, j] / sum_i A[i, j].
/// Throws UnmatchedColumnError for a zero-mass column.
Matrix barycentric_projection(const Matrix& payload, const TransportPlan& plan);

/// Warps an exemplar style map onto the source grid.
StyleMap warp_style(const StyleMap& exemplar_style, const TransportPlan& plan, Grid source_grid);

/// Warps exemplar labels as one-hot payload; each source position takes the
/// highest-scoring class (smallest id on ties). Positions fed only by
/// ignore pixels stay ignore.
LabelMask warp_labels(const LabelMask& exemplar_mask, const TransportPlan& plan, Grid source_grid);

/// Fraction of labeled reference pixels whose warped label matches.
/// Reference ignore pixels are excluded from both counts.
double correspondence_accuracy(const LabelMask& warped, const LabelMask& reference);

/// Masses for the exemplar side as selected by cfg.mass_mode. Label masks are
/// resized to the feature grids when their extents differ.
Vector exemplar_masses(const FeatureMap& source, const FeatureMap& exemplar, MassMode mode,
                       const LabelMask* source_mask = nullptr, const LabelMask* exemplar_mask = nullptr);

/// Cost, masses and Sinkhorn in one call: rows are exemplar positions,
/// columns source positions, p_x uniform.
TransportPlan correspond(const FeatureMap& source, const FeatureMap& exemplar, const CorrespondenceConfig& cfg,
                         const LabelMask* source_mask = nullptr, const LabelMask* exemplar_mask = nullptr);

}  // namespace dsk
