#include "support.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

#include <unistd.h>

namespace dsk::test {

double Rng::normal() {
  const double u1 = std::max(uniform(), 1e-300);
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(lo, hi);
  }
  return m;
}

Vector random_probability(Rng& rng, Eigen::Index n, double floor) {
  Vector p(n);
  for (Eigen::Index i = 0; i < n; ++i) p[i] = floor + rng.uniform();
  return p / p.sum();
}

namespace {

std::vector<float> random_values(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

Matrix random_weights(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  // Round through f32 so weights saved to disk reload identically.
  Matrix m = random_matrix(rng, rows, cols, -1.0, 1.0);
  return m.cast<float>().cast<double>();
}

}  // namespace

FeatureMap random_features(Rng& rng, std::size_t channels, Grid grid, double lo, double hi) {
  return FeatureMap(channels, grid, random_values(rng, channels * grid.size(), lo, hi));
}

StyleMap random_style(Rng& rng, std::size_t channels, Grid grid, double lo, double hi) {
  return StyleMap(channels, grid, random_values(rng, channels * grid.size(), lo, hi));
}

LabelMask random_mask(Rng& rng, Grid grid, std::size_t num_classes) {
  std::vector<ClassId> ids(grid.size());
  for (auto& id : ids) id = static_cast<ClassId>(rng.index(num_classes));
  return LabelMask(grid, num_classes, std::move(ids));
}

ToyDecoderWeights random_decoder(Rng& rng, std::size_t content_channels, std::size_t hidden,
                                 std::size_t style_channels) {
  const auto c = static_cast<Eigen::Index>(content_channels);
  const auto h = static_cast<Eigen::Index>(hidden);
  const auto s = static_cast<Eigen::Index>(style_channels);
  ToyDecoderWeights w;
  w.w_in = random_weights(rng, h, c);
  w.modulation.w_alpha = random_weights(rng, h, s);
  w.modulation.b_alpha = random_weights(rng, h, 1).col(0);
  w.modulation.w_beta = random_weights(rng, h, s);
  w.modulation.b_beta = random_weights(rng, h, 1).col(0);
  w.w_out = random_weights(rng, 3, h);
  w.b_out = random_weights(rng, 3, 1).col(0);
  return w;
}

FeatureMap cluster_features(std::span<const ClassId> clusters, Grid grid, std::size_t channels) {
  std::vector<float> values(channels * grid.size(), 0.0f);
  for (std::size_t l = 0; l < grid.size(); ++l) values[clusters[l] * grid.size() + l] = 1.0f;
  return FeatureMap(channels, grid, std::move(values));
}

std::uint64_t fnv1a(std::span<const std::byte> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::byte b : bytes) {
    h ^= std::to_integer<std::uint8_t>(b);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex(std::uint64_t value) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, value >>= 4) s[static_cast<std::size_t>(i)] = digits[value & 0xF];
  return s;
}

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("dsk-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ignored;
  std::filesystem::remove_all(path_, ignored);
}

}  // namespace dsk::test
