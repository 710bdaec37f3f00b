#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dsk/dsk.hpp"

namespace dsk::test {

/// splitmix64: bit-identical streams on every platform, unlike std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }
  /// Box-Muller; only used where bit-stability across libms does not matter.
  double normal();

 private:
  std::uint64_t state_;
};

Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0, double hi = 1.0);
Vector random_probability(Rng& rng, Eigen::Index n, double floor = 0.05);

FeatureMap random_features(Rng& rng, std::size_t channels, Grid grid, double lo = -1.0, double hi = 1.0);
StyleMap random_style(Rng& rng, std::size_t channels, Grid grid, double lo = -1.0, double hi = 1.0);
LabelMask random_mask(Rng& rng, Grid grid, std::size_t num_classes);

ToyDecoderWeights random_decoder(Rng& rng, std::size_t content_channels, std::size_t hidden, std::size_t style_channels);

/// Features whose position l is `scale * e_{cluster[l]}` in `channels` dims:
/// mutually orthogonal, identical within a cluster.
FeatureMap cluster_features(std::span<const ClassId> clusters, Grid grid, std::size_t channels);

std::uint64_t fnv1a(std::span<const std::byte> bytes);
std::string hex(std::uint64_t value);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace dsk::test
