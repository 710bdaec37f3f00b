#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <json.hpp>

#include "oracles.hpp"
#include "support.hpp"

using namespace dsk;
using dsk::test::Rng;

namespace {

std::vector<ClassId> all_classes(std::size_t k) {
  std::vector<ClassId> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = static_cast<ClassId>(i);
  return out;
}

FeatureMap scaled(const FeatureMap& f, float s) {
  std::vector<float> v(f.values().begin(), f.values().end());
  for (float& x : v) x *= s;
  return FeatureMap(f.channels(), f.grid(), std::move(v));
}

}  // namespace

TEST_SUITE("style-metric") {

TEST_CASE("masked_gram examples") {
  SUBCASE("single pixel gives the outer product") {
    const FeatureMap f(3, Grid{1, 2}, {1, 9, 2, 9, -3, 9});
    const LabelMask m(Grid{1, 2}, 2, {0, 1});
    const ClassGram g = masked_gram(f, m, 0);
    Vector v(3);
    v << 1, 2, -3;
    CHECK(g.pixel_count == 1);
    CHECK((g.q - v * v.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("v and -v give v v^T") {
    const FeatureMap f(2, Grid{1, 2}, {1, -1, 2, -2});
    const LabelMask m(Grid{1, 2}, 1, {0, 0});
    Vector v(2);
    v << 1, 2;
    CHECK((masked_gram(f, m, 0).q - v * v.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("dense oracle on a full mask") {
    Rng rng(3);
    const FeatureMap f = test::random_features(rng, 4, Grid{3, 3});
    const LabelMask m(Grid{3, 3}, 1, std::vector<ClassId>(9, 0));
    const Matrix expect = oracle::gram_direct(flatten_spatial(f), std::vector<bool>(9, true));
    CHECK((masked_gram(f, m, 0).q - expect).cwiseAbs().maxCoeff() <= 1e-6);
  }
  SUBCASE("errors") {
    const FeatureMap f(1, Grid{1, 2}, {1, 2});
    CHECK_THROWS_AS(masked_gram(f, LabelMask(Grid{1, 2}, 2, {0, 0}), 1), DegenerateInputError);
    CHECK_THROWS_AS(masked_gram(f, LabelMask(Grid{2, 1}, 1, {0, 0}), 0), ShapeError);
  }
}

TEST_CASE("property: masked Grams are symmetric PSD and order independent") {
  Rng rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    const Grid grid{1 + rng.index(8), 1 + rng.index(8)};
    const std::size_t v = 1 + rng.index(12);
    const FeatureMap f = test::random_features(rng, v, grid, -3.0, 3.0);
    const LabelMask m = test::random_mask(rng, grid, 3);
    for (ClassId k = 0; k < 3; ++k) {
      const auto ids = m.ids();
      if (std::find(ids.begin(), ids.end(), k) == ids.end()) continue;
      const Matrix q = masked_gram(f, m, k).q;
      CHECK((q - q.transpose()).cwiseAbs().maxCoeff() <= 1e-6);
      const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(q).eigenvalues();
      CHECK(ev.minCoeff() >= -1e-5 * std::max(1.0, ev.cwiseAbs().maxCoeff()));

      // Reverse the positions of both features and mask.
      const std::size_t n = grid.size();
      std::vector<float> fv(f.values().begin(), f.values().end());
      std::vector<float> rv(fv.size());
      std::vector<ClassId> rm(n);
      for (std::size_t c = 0; c < v; ++c) {
        for (std::size_t l = 0; l < n; ++l) rv[c * n + l] = fv[c * n + n - 1 - l];
      }
      for (std::size_t l = 0; l < n; ++l) rm[l] = ids[n - 1 - l];
      const Matrix qr = masked_gram(FeatureMap(v, grid, rv), LabelMask(grid, 3, rm), k).q;
      CHECK((q - qr).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("class_style_distance") {
  const FeatureMap a(2, Grid{1, 1}, {1, 0});
  const FeatureMap b(2, Grid{1, 1}, {0, 2});
  const LabelMask m(Grid{1, 1}, 1, {0});
  // ||diag(1, 0) - diag(0, 4)||_F^2 / 2^2 = 17 / 4
  CHECK(class_style_distance(a, m, b, m, 0) == doctest::Approx(4.25).epsilon(1e-15));
  CHECK(class_style_distance(b, m, a, m, 0) == class_style_distance(a, m, b, m, 0));
  CHECK(class_style_distance(a, m, a, m, 0) == 0.0);

  Rng rng(66);
  for (int trial = 0; trial < 20; ++trial) {
    const FeatureMap x = test::random_features(rng, 5, Grid{3, 3});
    const FeatureMap y = test::random_features(rng, 5, Grid{2, 4});
    const LabelMask mx(Grid{3, 3}, 1, std::vector<ClassId>(9, 0));
    const LabelMask my(Grid{2, 4}, 1, std::vector<ClassId>(8, 0));
    const double d = class_style_distance(x, mx, y, my, 0);
    CHECK(d >= 0.0);
    CHECK(std::abs(d - class_style_distance(y, my, x, mx, 0)) <= 1e-9);
    CHECK(class_style_distance(x, mx, x, mx, 0) <= 1e-9);
  }
  CHECK_THROWS_AS(class_style_distance(a, m, b, LabelMask(Grid{1, 1}, 2, {1}), 0), DegenerateInputError);
}

TEST_CASE("localized_style_score endpoints") {
  Rng rng(77);
  const Grid grid{4, 4};
  const FeatureMap src = test::random_features(rng, 6, grid);
  const FeatureMap ref = test::random_features(rng, 6, grid);
  const LabelMask mask = test::random_mask(rng, grid, 3);
  const auto classes = all_classes(3);

  const MetricReport same = localized_style_score(src, ref, src, mask, mask, classes);
  REQUIRE_FALSE(same.classes.empty());
  for (const ClassScore& c : same.classes) CHECK(std::abs(c.h - 1.0) <= 1e-9);
  CHECK(std::abs(same.average_h - 1.0) <= 1e-9);

  const MetricReport done = localized_style_score(src, ref, ref, mask, mask, classes);
  for (const ClassScore& c : done.classes) CHECK(std::abs(c.h) <= 1e-9);
}

TEST_CASE("halfway translation in Gram space") {
  // Class 0: src pixels (1,0),(1,0); ref (0,1); trans (1,0),(0,1) so Q_trans = I/2.
  // L_src = (1 + 1) / 4, L_trans = (1/4 + 1/4) / 4, H = 1/4.
  // Class 1: trans equals src, H = 1.
  const Grid g4{1, 4};
  const FeatureMap src(2, g4, {1, 1, 0, 0, 0, 0, 3, 3});
  const FeatureMap trans(2, g4, {1, 0, 0, 0, 0, 1, 3, 3});
  const FeatureMap ref(2, Grid{1, 2}, {0, 2, 1, 0});
  const LabelMask mask_src(g4, 2, {0, 0, 1, 1});
  const LabelMask mask_ref(Grid{1, 2}, 2, {0, 1});
  const MetricReport r = localized_style_score(src, ref, trans, mask_src, mask_ref, all_classes(2));
  REQUIRE(r.classes.size() == 2);
  CHECK(r.classes[0].l_src_ref == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.classes[0].l_trans_ref == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(r.classes[0].h == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(r.classes[1].h == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.average_h == doctest::Approx(0.625).epsilon(1e-15));
}

TEST_CASE("property: H is invariant to a common feature scale") {
  Rng rng(88);
  for (int trial = 0; trial < 20; ++trial) {
    const Grid grid{3, 5};
    const FeatureMap src = test::random_features(rng, 4, grid);
    const FeatureMap ref = test::random_features(rng, 4, grid);
    const FeatureMap trans = test::random_features(rng, 4, grid);
    const LabelMask ms = test::random_mask(rng, grid, 2);
    const LabelMask mr = test::random_mask(rng, grid, 2);
    const MetricReport base = localized_style_score(src, ref, trans, ms, mr, all_classes(2));
    for (const float s : {0.1f, 3.0f}) {
      const MetricReport r =
          localized_style_score(scaled(src, s), scaled(ref, s), scaled(trans, s), ms, mr, all_classes(2));
      REQUIRE(r.classes.size() == base.classes.size());
      for (std::size_t i = 0; i < r.classes.size(); ++i) CHECK(std::abs(r.classes[i].h - base.classes[i].h) <= 1e-6);
    }
  }
}

TEST_CASE("skipped classes and JSON shape") {
  const Grid grid{1, 2};
  const FeatureMap src(1, grid, {1, 2});
  const FeatureMap ref(1, grid, {3, 4});
  SUBCASE("disjoint class sets") {
    const MetricReport r =
        localized_style_score(src, ref, src, LabelMask(grid, 2, {0, 0}), LabelMask(grid, 2, {1, 1}), all_classes(2));
    CHECK(r.classes.empty());
    CHECK(std::isnan(r.average_h));
    REQUIRE(r.skipped.size() == 2);
    const auto doc = nlohmann::json::parse(to_json(r));
    CHECK(doc["average_H"].is_null());
    CHECK(doc["classes"].empty());
    CHECK(doc["skipped"].size() == 2);
    CHECK(doc["skipped"][0]["class"] == 0);
  }
  SUBCASE("zero denominator") {
    const LabelMask m(grid, 1, {0, 0});
    const MetricReport r = localized_style_score(src, src, ref, m, m, all_classes(1));
    CHECK(r.classes.empty());
    REQUIRE(r.skipped.size() == 1);
    CHECK(r.skipped[0].reason.find("zero") != std::string::npos);
  }
  SUBCASE("scored classes") {
    const LabelMask m(grid, 1, {0, 0});
    const auto doc = nlohmann::json::parse(to_json(localized_style_score(src, ref, src, m, m, all_classes(1))));
    CHECK(doc["classes"]["0"]["H"].get<double>() == doctest::Approx(1.0));
    CHECK(doc["classes"]["0"].contains("L_trans_ref"));
    CHECK(doc["classes"]["0"].contains("L_src_ref"));
    CHECK(doc["average_H"].get<double>() == doctest::Approx(1.0));
  }
  SUBCASE("masks at a finer resolution are resized to the features") {
    const LabelMask fine(Grid{2, 4}, 1, std::vector<ClassId>(8, 0));
    const MetricReport r = localized_style_score(src, ref, ref, fine, fine, all_classes(1));
    REQUIRE(r.classes.size() == 1);
    CHECK(r.classes[0].h == 0.0);
  }
}

}  // TEST_SUITE
