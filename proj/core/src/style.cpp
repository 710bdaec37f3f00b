#include "dsk/style.hpp"

#include <cmath>
#include <string>

#include "dsk/error.hpp"
#include "dsk/tensor_io.hpp"

namespace dsk {

PonoStats pono_stats(const Matrix& activations) {
  if (activations.rows() < 1) throw ShapeError("pono_stats needs at least one channel");
  const double channels = static_cast<double>(activations.rows());
  PonoStats stats;
  stats.mu = activations.colwise().sum().transpose() / channels;
  stats.sigma.resize(activations.cols());
  for (Eigen::Index l = 0; l < activations.cols(); ++l) {
    const double var = (activations.col(l).array() - stats.mu[l]).square().sum() / channels;
    stats.sigma[l] = std::sqrt(var + kPonoEpsilon);
  }
  return stats;
}

Matrix dnorm(const Matrix& activations, const Matrix& alpha, const Matrix& beta) {
  if (alpha.rows() != activations.rows() || alpha.cols() != activations.cols() ||
      beta.rows() != activations.rows() || beta.cols() != activations.cols()) {
    throw ShapeError("dnorm operands differ in shape");
  }
  const PonoStats stats = pono_stats(activations);
  Matrix normalized = activations.rowwise() - stats.mu.transpose();
  normalized.array().rowwise() /= stats.sigma.transpose().array();
  return (normalized.array() * beta.array() + alpha.array()).matrix();
}

void ModulationWeights::validate() const {
  if (w_alpha.rows() != w_beta.rows() || w_alpha.cols() != w_beta.cols() || b_alpha.size() != w_alpha.rows() ||
      b_beta.size() != w_beta.rows()) {
    throw ShapeError("modulation weights have inconsistent shapes");
  }
  if (!w_alpha.allFinite() || !w_beta.allFinite() || !b_alpha.allFinite() || !b_beta.allFinite()) {
    throw DegenerateInputError("modulation weights contain non-finite values");
  }
}

Modulation project_modulation(const Matrix& style, const ModulationWeights& weights) {
  weights.validate();
  if (static_cast<std::size_t>(style.rows()) != weights.style_channels()) {
    throw ShapeError("style has " + std::to_string(style.rows()) + " channels, modulation expects " +
                     std::to_string(weights.style_channels()));
  }
  Modulation m;
  m.alpha = (weights.w_alpha * style).colwise() + weights.b_alpha;
  m.beta = (weights.w_beta * style).colwise() + weights.b_beta;
  return m;
}

StyleMap global_style(const StyleMap& style) {
  const Matrix flat = flatten_spatial(style);
  const Vector mean = flat.rowwise().mean();
  return unflatten_spatial<StyleTag>(mean.replicate(1, flat.cols()), style.grid());
}

StyleMap mix_style(const StyleMap& style) {
  const Matrix flat = flatten_spatial(style);
  const Vector mean = flat.rowwise().mean();
  const Matrix mixed = 0.5 * mean.replicate(1, flat.cols()) + 0.5 * flat;
  return unflatten_spatial<StyleTag>(mixed, style.grid());
}

void ToyDecoderWeights::validate() const {
  modulation.validate();
  if (w_in.rows() != static_cast<Eigen::Index>(modulation.out_channels())) {
    throw ShapeError("w_in produces " + std::to_string(w_in.rows()) + " channels, modulation expects " +
                     std::to_string(modulation.out_channels()));
  }
  if (w_out.rows() != 3 || w_out.cols() != w_in.rows() || b_out.size() != 3) {
    throw ShapeError("w_out must be 3 x C' and b_out length 3");
  }
  if (!w_in.allFinite() || !w_out.allFinite() || !b_out.allFinite()) {
    throw DegenerateInputError("decoder weights contain non-finite values");
  }
}

namespace {

Matrix load_matrix(const std::filesystem::path& path) {
  const Tensor t = load_tensor(path);
  if (t.dtype() != DType::f32 || t.rank() != 2) throw ShapeError(path.string() + ": expected f32 [rows, cols]");
  const auto rows = static_cast<Eigen::Index>(t.dims()[0]);
  const auto cols = static_cast<Eigen::Index>(t.dims()[1]);
  const auto v = t.f32();
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = v[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

Vector load_vector(const std::filesystem::path& path) {
  const Tensor t = load_tensor(path);
  if (t.dtype() != DType::f32 || t.rank() != 1) throw ShapeError(path.string() + ": expected f32 [n]");
  const auto v = t.f32();
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

void save_matrix(const Matrix& m, const std::filesystem::path& path) {
  std::vector<float> v;
  v.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) v.push_back(static_cast<float>(m(r, c)));
  }
  save_tensor(Tensor({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())}, std::move(v)), path);
}

void save_vector(const Vector& x, const std::filesystem::path& path) {
  std::vector<float> v(x.data(), x.data() + x.size());
  save_tensor(Tensor({static_cast<std::size_t>(x.size())}, std::move(v)), path);
}

}  // namespace

ToyDecoderWeights ToyDecoderWeights::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
  ToyDecoderWeights w;
  w.w_in = load_matrix(dir / "w_in.dst");
  w.modulation.w_alpha = load_matrix(dir / "w_alpha.dst");
  w.modulation.b_alpha = load_vector(dir / "b_alpha.dst");
  w.modulation.w_beta = load_matrix(dir / "w_beta.dst");
  w.modulation.b_beta = load_vector(dir / "b_beta.dst");
  w.w_out = load_matrix(dir / "w_out.dst");
  w.b_out = load_vector(dir / "b_out.dst");
  w.validate();
  return w;
}

void ToyDecoderWeights::save(const std::filesystem::path& dir) const {
  validate();
  std::filesystem::create_directories(dir);
  save_matrix(w_in, dir / "w_in.dst");
  save_matrix(modulation.w_alpha, dir / "w_alpha.dst");
  save_vector(modulation.b_alpha, dir / "b_alpha.dst");
  save_matrix(modulation.w_beta, dir / "w_beta.dst");
  save_vector(modulation.b_beta, dir / "b_beta.dst");
  save_matrix(w_out, dir / "w_out.dst");
  save_vector(b_out, dir / "b_out.dst");
}

Image toy_decode(const FeatureMap& content, const StyleMap& style, const ToyDecoderWeights& weights) {
  weights.validate();
  if (!(content.grid() == style.grid())) {
    throw ShapeError("content grid " + std::to_string(content.grid().height) + "x" +
                     std::to_string(content.grid().width) + " differs from style grid " +
                     std::to_string(style.grid().height) + "x" + std::to_string(style.grid().width));
  }
  if (weights.w_in.cols() != static_cast<Eigen::Index>(content.channels())) {
    throw ShapeError("w_in expects " + std::to_string(weights.w_in.cols()) + " content channels, got " +
                     std::to_string(content.channels()));
  }
  const Matrix hidden = weights.w_in * flatten_spatial(content);
  const Modulation mod = project_modulation(flatten_spatial(style), weights.modulation);
  const Matrix activated = dnorm(hidden, mod.alpha, mod.beta).cwiseMax(0.0);
  const Matrix logits = (weights.w_out * activated).colwise() + weights.b_out;
  Image image{content.grid(), logits.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); })};
  return image;
}

}  // namespace dsk
