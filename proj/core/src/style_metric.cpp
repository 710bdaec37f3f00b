#include "dsk/style_metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "dsk/error.hpp"

namespace dsk {

ClassGram masked_gram(const FeatureMap& features, const LabelMask& mask, ClassId k) {
  if (!(features.grid() == mask.grid())) throw ShapeError("mask must be at the feature resolution");
  const Matrix flat = flatten_spatial(features);
  const auto ids = mask.ids();
  std::vector<Eigen::Index> picked;
  for (std::size_t l = 0; l < ids.size(); ++l) {
    if (ids[l] == k) picked.push_back(static_cast<Eigen::Index>(l));
  }
  if (picked.empty()) throw DegenerateInputError("class " + std::to_string(k) + " has no pixels");

  const Matrix masked = flat(Eigen::all, picked);
  ClassGram gram;
  gram.k = k;
  gram.pixel_count = picked.size();
  gram.q = masked * masked.transpose() / static_cast<double>(picked.size());
  // Symmetric by construction; make it exact so downstream checks are bitwise.
  gram.q = 0.5 * (gram.q + gram.q.transpose()).eval();
  return gram;
}

namespace {

double gram_distance(const Matrix& qa, const Matrix& qb) {
  const double v = static_cast<double>(qa.rows());
  return (qa - qb).squaredNorm() / (v * v);
}

}  // namespace

double class_style_distance(const FeatureMap& a, const LabelMask& mask_a, const FeatureMap& b,
                            const LabelMask& mask_b, ClassId k) {
  if (a.channels() != b.channels()) throw ShapeError("feature maps differ in channel count");
  return gram_distance(masked_gram(a, mask_a, k).q, masked_gram(b, mask_b, k).q);
}

MetricReport localized_style_score(const FeatureMap& src, const FeatureMap& ref, const FeatureMap& trans,
                                   const LabelMask& mask_src, const LabelMask& mask_ref,
                                   std::span<const ClassId> classes) {
  if (src.channels() != ref.channels() || src.channels() != trans.channels()) {
    throw ShapeError("source, reference and translation features differ in channel count");
  }
  if (!(src.grid() == trans.grid())) throw ShapeError("translation must share the source grid");

  const LabelMask m_src = mask_src.grid() == src.grid() ? mask_src : resize_mask_nearest(mask_src, src.grid());
  const LabelMask m_ref = mask_ref.grid() == ref.grid() ? mask_ref : resize_mask_nearest(mask_ref, ref.grid());
  const auto area_src = class_areas(m_src);
  const auto area_ref = class_areas(m_ref);
  auto present = [](const std::vector<std::size_t>& areas, ClassId k) { return k < areas.size() && areas[k] > 0; };

  std::vector<ClassId> order(classes.begin(), classes.end());
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  MetricReport report;
  double sum_h = 0.0;
  for (ClassId k : order) {
    const bool in_src = present(area_src, k);
    const bool in_ref = present(area_ref, k);
    if (!in_src || !in_ref) {
      report.skipped.push_back({k, !in_src && !in_ref ? "absent from source and reference"
                                   : !in_src         ? "absent from source"
                                                     : "absent from reference"});
      continue;
    }
    const Matrix q_ref = masked_gram(ref, m_ref, k).q;
    const double l_src_ref = gram_distance(masked_gram(src, m_src, k).q, q_ref);
    const double l_trans_ref = gram_distance(masked_gram(trans, m_src, k).q, q_ref);
    if (!(l_src_ref > 0.0)) {
      report.skipped.push_back({k, "zero source-reference distance"});
      continue;
    }
    const double h = l_trans_ref / l_src_ref;
    report.classes.push_back({k, l_trans_ref, l_src_ref, h});
    sum_h += h;
  }
  report.average_h = report.classes.empty() ? std::numeric_limits<double>::quiet_NaN()
                                            : sum_h / static_cast<double>(report.classes.size());
  return report;
}

std::string to_json(const MetricReport& report) {
  nlohmann::ordered_json classes = nlohmann::ordered_json::object();
  for (const auto& c : report.classes) {
    classes[std::to_string(c.k)] = {{"L_trans_ref", c.l_trans_ref}, {"L_src_ref", c.l_src_ref}, {"H", c.h}};
  }
  nlohmann::ordered_json skipped = nlohmann::ordered_json::array();
  for (const auto& s : report.skipped) skipped.push_back({{"class", s.k}, {"reason", s.reason}});

  nlohmann::ordered_json doc;
  doc["classes"] = std::move(classes);
  doc["average_H"] = std::isnan(report.average_h) ? nlohmann::ordered_json(nullptr)
                                                  : nlohmann::ordered_json(report.average_h);
  doc["skipped"] = std::move(skipped);
  return doc.dump(2) + "\n";
}

}  // namespace dsk
