#pragma once

#include <span>
#include <string>
#include <vector>

#include "dsk/maps.hpp"
#include "dsk/numeric.hpp"

namespace dsk {

/// Gram matrix of the features under one class mask, normalized by the
/// class pixel count.
struct ClassGram {
  ClassId k = 0;
  Matrix q;  // V x V, symmetric PSD
  std::size_t pixel_count = 0;
};

/// Q = (1 / n_k) * sum over pixels of class k of f_l f_l^T.
/// The mask must already be at the feature resolution.
/// Throws DegenerateInputError when class k has no pixels.
ClassGram masked_gram(const FeatureMap& features, const LabelMask& mask, ClassId k);

/// ||Q_a^k - Q_b^k||_F^2 / V^2.
double class_style_distance(const FeatureMap& a, const LabelMask& mask_a, const FeatureMap& b,
                            const LabelMask& mask_b, ClassId k);

struct ClassScore {
  ClassId k = 0;
  double l_trans_ref = 0.0;
  double l_src_ref = 0.0;
  double h = 0.0;
};

struct SkippedClass {
  ClassId k = 0;
  std::string reason;
};

struct MetricReport {
  std::vector<ClassScore> classes;  // ascending class id
  double average_h = 0.0;           // mean over `classes`; NaN when empty
  std::vector<SkippedClass> skipped;
};

/// Localized style score per class: H^k = L^k(trans, ref) / L^k(src, ref).
///
/// The translation is scored against the source mask. Masks whose grid
/// differs from the feature grid are nearest-neighbor resized first. Classes
/// absent from either image, or with L^k(src, ref) = 0, are listed in
/// `skipped` instead.
MetricReport localized_style_score(const FeatureMap& src, const FeatureMap& ref, const FeatureMap& trans,
                                   const LabelMask& mask_src, const LabelMask& mask_ref,
                                   std::span<const ClassId> classes);

/// {"classes": {"<k>": {"L_trans_ref", "L_src_ref", "H"}}, "average_H", "skipped": [...]}.
/// average_H is null when no class was scored.
std::string to_json(const MetricReport& report);

}  // namespace dsk
