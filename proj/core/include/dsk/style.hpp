#pragma once

#include <filesystem>

#include "dsk/maps.hpp"
#include "dsk/numeric.hpp"

namespace dsk {

/// Added to the channel variance before the square root.
inline constexpr double kPonoEpsilon = 1e-5;

/// Position-wise moments across channels.
struct PonoStats {
  Vector mu;     // length HW
  Vector sigma;  // length HW, >= sqrt(kPonoEpsilon)
};

/// mu[l] = mean_c P[c, l]; sigma[l] = sqrt(population variance + eps).
PonoStats pono_stats(const Matrix& activations);

/// Dense Normalization: strips the position-wise moments of `activations`
/// and re-injects the dense modulation,
///   out[c, l] = (P[c, l] - mu[l]) / sigma[l] * beta[c, l] + alpha[c, l].
Matrix dnorm(const Matrix& activations, const Matrix& alpha, const Matrix& beta);

/// 1x1-convolution weights mapping S style channels to C' modulation channels.
struct ModulationWeights {
  Matrix w_alpha;  // C' x S
  Vector b_alpha;  // C'
  Matrix w_beta;   // C' x S
  Vector b_beta;   // C'

  std::size_t out_channels() const noexcept { return static_cast<std::size_t>(w_alpha.rows()); }
  std::size_t style_channels() const noexcept { return static_cast<std::size_t>(w_alpha.cols()); }
  void validate() const;
};

struct Modulation {
  Matrix alpha;  // C' x HW
  Matrix beta;   // C' x HW
};

Modulation project_modulation(const Matrix& style, const ModulationWeights& weights);

/// Spatial mean of the style, repeated at every position.
StyleMap global_style(const StyleMap& style);

/// 0.5 * global + 0.5 * dense.
StyleMap mix_style(const StyleMap& style);

/// Weights for the three-stage toy decoder used to exercise DNorm.
struct ToyDecoderWeights {
  Matrix w_in;  // C' x C
  ModulationWeights modulation;
  Matrix w_out;  // 3 x C'
  Vector b_out;  // 3

  void validate() const;

  /// Directory layout: w_in.dst w_alpha.dst b_alpha.dst w_beta.dst b_beta.dst
  /// w_out.dst b_out.dst, each an f32 DST1 tensor (matrices [rows, cols],
  /// vectors [n]).
  static ToyDecoderWeights load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;
};

/// Three-channel image with values in [0, 1], one row of `rgb` per channel.
struct Image {
  Grid grid;
  Matrix rgb;  // 3 x HW
};

/// W_in per position -> DNorm with the projected style -> ReLU ->
/// W_out + b_out per position -> logistic.
Image toy_decode(const FeatureMap& content, const StyleMap& style, const ToyDecoderWeights& weights);

/// Binary PPM (P6), 8 bits per sample, round(255 * v) with halves rounded up.
std::vector<std::byte> encode_ppm(const Image& image);

}  // namespace dsk
