#include "dsk/correspondence.hpp"

#include <algorithm>
#include <string>

#include "dsk/error.hpp"

namespace dsk {

Matrix build_cost(const Matrix& exemplar_features, const Matrix& source_features) {
  const Matrix z = cosine_similarity_matrix(exemplar_features, source_features, /*clip_negative=*/true);
  return (1.0 - z.array()).matrix();
}

Vector uniform_masses(std::size_t n) {
  if (n == 0) throw ShapeError("cannot build masses for zero positions");
  return Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
}

namespace {

Vector normalize_masses(Vector masses, const char* empty_reason) {
  const double total = masses.sum();
  if (!(total > 0.0)) throw DegenerateInputError(empty_reason);
  return masses / total;
}

}  // namespace

Vector masses_from_labels(const LabelMask& exemplar_mask, const LabelMask& source_mask) {
  if (exemplar_mask.num_classes() != source_mask.num_classes()) {
    throw ShapeError("masks use " + std::to_string(exemplar_mask.num_classes()) + " and " +
                     std::to_string(source_mask.num_classes()) + " classes");
  }
  const auto area_y = class_areas(exemplar_mask);
  const auto area_x = class_areas(source_mask);
  const auto ids = exemplar_mask.ids();
  Vector masses(static_cast<Eigen::Index>(ids.size()));
  for (std::size_t l = 0; l < ids.size(); ++l) {
    const ClassId k = ids[l];
    masses[static_cast<Eigen::Index>(l)] =
        k == LabelMask::kIgnore ? 0.0 : static_cast<double>(area_x[k]) / static_cast<double>(area_y[k]);
  }
  return normalize_masses(std::move(masses), "no shared classes");
}

Vector masses_from_features(const Matrix& exemplar_features, const Matrix& source_features) {
  const Vector self = clipped_similarity_row_sums(exemplar_features, exemplar_features);
  const Vector cross = clipped_similarity_row_sums(exemplar_features, source_features);
  Vector masses(self.size());
  for (Eigen::Index i = 0; i < self.size(); ++i) {
    // self[i] >= 1 for any nonzero column (its own similarity); zero columns sum to 0.
    masses[i] = self[i] > 0.0 ? cross[i] / self[i] : 0.0;
  }
  return normalize_masses(std::move(masses), "estimated masses are all zero");
}

Matrix barycentric_projection(const Matrix& payload, const TransportPlan& plan) {
  if (static_cast<std::size_t>(payload.cols()) != plan.rows()) {
    throw ShapeError("payload has " + std::to_string(payload.cols()) + " positions, plan has " +
                     std::to_string(plan.rows()) + " rows");
  }
  const Vector col_sums = plan.values.colwise().sum().transpose();
  for (Eigen::Index j = 0; j < col_sums.size(); ++j) {
    if (!(col_sums[j] > 0.0)) throw UnmatchedColumnError(static_cast<std::size_t>(j));
  }
  Matrix out = payload * plan.values;
  out.array().rowwise() /= col_sums.transpose().array();
  return out;
}

StyleMap warp_style(const StyleMap& exemplar_style, const TransportPlan& plan, Grid source_grid) {
  if (source_grid.size() != plan.cols()) {
    throw ShapeError("source grid has " + std::to_string(source_grid.size()) + " positions, plan has " +
                     std::to_string(plan.cols()) + " columns");
  }
  const Matrix warped = barycentric_projection(flatten_spatial(exemplar_style), plan);
  return unflatten_spatial<StyleTag>(warped, source_grid);
}

LabelMask warp_labels(const LabelMask& exemplar_mask, const TransportPlan& plan, Grid source_grid) {
  if (source_grid.size() != plan.cols()) {
    throw ShapeError("source grid has " + std::to_string(source_grid.size()) + " positions, plan has " +
                     std::to_string(plan.cols()) + " columns");
  }
  const Matrix scores = barycentric_projection(one_hot(exemplar_mask), plan);
  std::vector<ClassId> ids(source_grid.size(), LabelMask::kIgnore);
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < scores.rows(); ++k) {
      if (scores(k, j) > best) {
        best = scores(k, j);
        ids[static_cast<std::size_t>(j)] = static_cast<ClassId>(k);
      }
    }
  }
  return LabelMask(source_grid, exemplar_mask.num_classes(), std::move(ids));
}

double correspondence_accuracy(const LabelMask& warped, const LabelMask& reference) {
  if (!(warped.grid() == reference.grid())) throw ShapeError("warped and reference masks differ in size");
  std::size_t labeled = 0;
  std::size_t correct = 0;
  const auto w = warped.ids();
  const auto r = reference.ids();
  for (std::size_t l = 0; l < r.size(); ++l) {
    if (r[l] == LabelMask::kIgnore) continue;
    ++labeled;
    if (w[l] == r[l]) ++correct;
  }
  if (labeled == 0) throw DegenerateInputError("reference mask has no labeled pixels");
  return static_cast<double>(correct) / static_cast<double>(labeled);
}

Vector exemplar_masses(const FeatureMap& source, const FeatureMap& exemplar, MassMode mode,
                       const LabelMask* source_mask, const LabelMask* exemplar_mask) {
  switch (mode) {
    case MassMode::uniform:
      return uniform_masses(exemplar.grid().size());
    case MassMode::estimated:
      return masses_from_features(flatten_spatial(exemplar), flatten_spatial(source));
    case MassMode::labels: {
      if (source_mask == nullptr || exemplar_mask == nullptr) {
        throw std::invalid_argument("label masses need both masks");
      }
      const std::size_t k = std::max(source_mask->num_classes(), exemplar_mask->num_classes());
      auto fit = [k](const LabelMask& m, Grid g) {
        const LabelMask sized = m.grid() == g ? m : resize_mask_nearest(m, g);
        return sized.with_num_classes(k);
      };
      return masses_from_labels(fit(*exemplar_mask, exemplar.grid()), fit(*source_mask, source.grid()));
    }
  }
  throw std::invalid_argument("unknown mass mode");
}

TransportPlan correspond(const FeatureMap& source, const FeatureMap& exemplar, const CorrespondenceConfig& cfg,
                         const LabelMask* source_mask, const LabelMask* exemplar_mask) {
  cfg.validate();
  const Matrix fx = flatten_spatial(source);
  const Matrix fy = flatten_spatial(exemplar);
  const Matrix cost = build_cost(fy, fx);
  const Vector p_y = exemplar_masses(source, exemplar, cfg.mass_mode, source_mask, exemplar_mask);
  const Vector p_x = uniform_masses(source.grid().size());
  return sinkhorn(cost, p_y, p_x, cfg);
}

}  // namespace dsk
