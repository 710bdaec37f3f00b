#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "dsk/dsk.hpp"

namespace dsk::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/// Bad flag combinations that CLI11 cannot express on its own.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sidecar files written next to a plan: plan.dst -> plan.json, plan.p_y.dst, plan.p_x.dst.
fs::path sibling(const fs::path& plan, const std::string& suffix) {
  fs::path p = plan;
  p.replace_extension(suffix);
  return p;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::as_bytes(std::span(text.data(), text.size())));
}

Tensor vector_tensor(const Vector& v) {
  std::vector<float> data(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) data[static_cast<std::size_t>(i)] = static_cast<float>(v[i]);
  const std::size_t n = data.size();
  return Tensor({n}, std::move(data));
}

Tensor matrix_tensor(const Matrix& m) {
  std::vector<float> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(static_cast<float>(m(r, c)));
  }
  return Tensor({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())}, std::move(data));
}

json grid_json(const Grid& g) { return json::array({g.height, g.width}); }

Grid grid_from_json(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2) {
    throw FormatError(FormatErrc::bad_dims, std::string("plan sidecar lacks ") + key);
  }
  return Grid{j[key][0].get<std::size_t>(), j[key][1].get<std::size_t>()};
}

LabelMask load_mask(const fs::path& path) { return LabelMask::from_tensor(load_tensor(path)); }
FeatureMap load_features(const fs::path& path) { return FeatureMap::from_tensor(load_tensor(path)); }

// ---------------------------------------------------------------------------

struct CorrespondArgs {
  std::string src_feat, ref_feat, out, mass = "estimated", src_mask, ref_mask;
  double lambda = 0.05;
  double tol = 1e-8;
  std::size_t max_iters = 1000;
};

int cmd_correspond(const CorrespondArgs& a, std::ostream& err) {
  CorrespondenceConfig cfg;
  cfg.lambda = a.lambda;
  cfg.marginal_tolerance = a.tol;
  cfg.max_iterations = a.max_iters;
  cfg.mass_mode = parse_mass_mode(a.mass);
  cfg.threads = thread_count_from_env();
  if (cfg.mass_mode == MassMode::labels && (a.src_mask.empty() || a.ref_mask.empty())) {
    throw UsageError("--mass labels requires --src-mask and --ref-mask");
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const FeatureMap source = load_features(a.src_feat);
  const FeatureMap exemplar = load_features(a.ref_feat);
  std::optional<LabelMask> src_mask, ref_mask;
  if (!a.src_mask.empty()) src_mask = load_mask(a.src_mask);
  if (!a.ref_mask.empty()) ref_mask = load_mask(a.ref_mask);

  const TransportPlan plan = correspond(source, exemplar, cfg, src_mask ? &*src_mask : nullptr,
                                        ref_mask ? &*ref_mask : nullptr);
  err << "iterations: " << plan.iterations_used << "\n";
  err << "achieved tolerance: " << plan.achieved_tolerance << "\n";
  if (!plan.converged) {
    throw NoConvergence("sinkhorn did not reach tolerance " + std::to_string(a.tol) + " (achieved " +
                        std::to_string(plan.achieved_tolerance) + ")");
  }

  const fs::path out = a.out;
  json sidecar;
  sidecar["source_grid"] = grid_json(source.grid());
  sidecar["exemplar_grid"] = grid_json(exemplar.grid());
  sidecar["lambda"] = cfg.lambda;
  sidecar["mass_mode"] = std::string(to_string(cfg.mass_mode));
  sidecar["iterations"] = plan.iterations_used;
  sidecar["achieved_tolerance"] = plan.achieved_tolerance;
  sidecar["row_marginals"] = sibling(out, ".p_y.dst").filename().string();
  sidecar["col_marginals"] = sibling(out, ".p_x.dst").filename().string();

  save_tensor(vector_tensor(plan.row_marginals), sibling(out, ".p_y.dst"));
  save_tensor(vector_tensor(plan.col_marginals), sibling(out, ".p_x.dst"));
  write_text_atomic(sibling(out, ".json"), sidecar.dump(2) + "\n");
  save_tensor(matrix_tensor(plan.values), out);
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct WarpArgs {
  std::string style, plan, out;
};

int cmd_warp(const WarpArgs& a, std::ostream& err) {
  const Tensor plan_tensor = load_tensor(a.plan);
  if (plan_tensor.dtype() != DType::f32 || plan_tensor.rank() != 2) {
    throw ShapeError("plan must be an f32 tensor of dims [Ny, Nx]");
  }
  const fs::path sidecar_path = sibling(a.plan, ".json");
  json sidecar;
  try {
    const auto bytes = read_file(sidecar_path);
    sidecar = json::parse(reinterpret_cast<const char*>(bytes.data()),
                          reinterpret_cast<const char*>(bytes.data()) + bytes.size());
  } catch (const json::exception& e) {
    throw FormatError(FormatErrc::bad_dims, sidecar_path.string() + ": " + e.what());
  }
  const Grid source_grid = grid_from_json(sidecar, "source_grid");
  const Grid exemplar_grid = grid_from_json(sidecar, "exemplar_grid");

  const std::size_t ny = plan_tensor.dims()[0];
  const std::size_t nx = plan_tensor.dims()[1];
  if (ny != exemplar_grid.size() || nx != source_grid.size()) {
    throw ShapeError("plan is " + std::to_string(ny) + "x" + std::to_string(nx) + " but sidecar grids hold " +
                     std::to_string(exemplar_grid.size()) + " and " + std::to_string(source_grid.size()) +
                     " positions");
  }
  const StyleMap style = StyleMap::from_tensor(load_tensor(a.style));
  if (style.grid().size() != ny) {
    throw ShapeError("style has " + std::to_string(style.grid().size()) + " positions, plan has " +
                     std::to_string(ny) + " rows");
  }

  TransportPlan plan;
  plan.values.resize(static_cast<Eigen::Index>(ny), static_cast<Eigen::Index>(nx));
  const auto v = plan_tensor.f32();
  for (std::size_t i = 0; i < ny; ++i) {
    for (std::size_t j = 0; j < nx; ++j) {
      plan.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i * nx + j];
    }
  }
  const StyleMap warped = warp_style(style, plan, source_grid);
  save_tensor(warped.to_tensor(), a.out);
  err << "warped " << style.channels() << " channels onto " << source_grid.height << "x" << source_grid.width
      << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct StylizeArgs {
  std::string content, style, weights, out;
};

int cmd_stylize(const StylizeArgs& a, std::ostream& err) {
  const FeatureMap content = load_features(a.content);
  const StyleMap style = StyleMap::from_tensor(load_tensor(a.style));
  const ToyDecoderWeights weights = ToyDecoderWeights::load(a.weights);
  const Image image = toy_decode(content, style, weights);
  write_file_atomic(a.out, encode_ppm(image));
  err << "wrote " << image.grid.width << "x" << image.grid.height << " image\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct MetricArgs {
  std::string src_feat, ref_feat, trans_feat, src_mask, ref_mask, out;
};

int cmd_metric(const MetricArgs& a, std::ostream& err) {
  const FeatureMap src = load_features(a.src_feat);
  const FeatureMap ref = load_features(a.ref_feat);
  const FeatureMap trans = load_features(a.trans_feat);
  LabelMask m_src = load_mask(a.src_mask);
  LabelMask m_ref = load_mask(a.ref_mask);
  const std::size_t k = std::max(m_src.num_classes(), m_ref.num_classes());
  m_src = m_src.with_num_classes(k);
  m_ref = m_ref.with_num_classes(k);

  std::vector<ClassId> classes(k);
  std::iota(classes.begin(), classes.end(), ClassId{0});
  const MetricReport report = localized_style_score(src, ref, trans, m_src, m_ref, classes);
  write_text_atomic(a.out, to_json(report));
  err << "scored " << report.classes.size() << " classes, skipped " << report.skipped.size() << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct MassesArgs {
  std::string mass = "estimated", src_feat, ref_feat, src_mask, ref_mask, out;
};

int cmd_masses(const MassesArgs& a, std::ostream& err) {
  const MassMode mode = parse_mass_mode(a.mass);
  Vector masses;
  switch (mode) {
    case MassMode::uniform: {
      if (a.ref_feat.empty() && a.ref_mask.empty()) throw UsageError("--mass uniform needs --ref-feat or --ref-mask");
      const Grid g = a.ref_feat.empty() ? load_mask(a.ref_mask).grid() : load_features(a.ref_feat).grid();
      masses = uniform_masses(g.size());
      break;
    }
    case MassMode::estimated: {
      if (a.src_feat.empty() || a.ref_feat.empty()) {
        throw UsageError("--mass estimated requires --src-feat and --ref-feat");
      }
      masses = masses_from_features(flatten_spatial(load_features(a.ref_feat)),
                                    flatten_spatial(load_features(a.src_feat)));
      break;
    }
    case MassMode::labels: {
      if (a.src_mask.empty() || a.ref_mask.empty()) throw UsageError("--mass labels requires --src-mask and --ref-mask");
      LabelMask m_src = load_mask(a.src_mask);
      LabelMask m_ref = load_mask(a.ref_mask);
      if (!a.src_feat.empty()) m_src = resize_mask_nearest(m_src, load_features(a.src_feat).grid());
      if (!a.ref_feat.empty()) m_ref = resize_mask_nearest(m_ref, load_features(a.ref_feat).grid());
      const std::size_t k = std::max(m_src.num_classes(), m_ref.num_classes());
      masses = masses_from_labels(m_ref.with_num_classes(k), m_src.with_num_classes(k));
      break;
    }
  }
  save_tensor(vector_tensor(masses), a.out);
  err << "wrote " << masses.size() << " exemplar masses (" << to_string(mode) << ")\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------

int cmd_info(const std::string& path, std::ostream& out) {
  const Tensor t = load_tensor(path);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  auto visit = [&](double x) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    sum += x;
  };
  if (t.dtype() == DType::f32) {
    for (float x : t.f32()) visit(x);
  } else {
    for (std::uint16_t x : t.u16()) visit(x);
  }
  out << "dtype: " << dtype_name(t.dtype()) << "\n";
  out << "dims: [";
  for (std::size_t i = 0; i < t.rank(); ++i) out << (i ? "," : "") << t.dims()[i];
  out << "]\n";
  out << "min: " << lo << "\n";
  out << "max: " << hi << "\n";
  out << "mean: " << sum / static_cast<double>(t.size()) << "\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"dsk: dense style correspondence, warping, stylization and localized style metric"};
  app.require_subcommand(1);

  CorrespondArgs corr;
  auto* correspond_cmd = app.add_subcommand("correspond", "Solve the exemplar-to-source transport plan");
  correspond_cmd->add_option("--src-feat", corr.src_feat, "Source correspondence features [C,H,W]")->required();
  correspond_cmd->add_option("--ref-feat", corr.ref_feat, "Exemplar correspondence features [C,H,W]")->required();
  correspond_cmd->add_option("--out", corr.out, "Plan output path (DST1 [Ny,Nx])")->required();
  correspond_cmd->add_option("--lambda", corr.lambda, "Entropy regularization")->capture_default_str();
  correspond_cmd->add_option("--mass", corr.mass, "Exemplar masses")
      ->check(CLI::IsMember({"uniform", "estimated", "labels"}))
      ->capture_default_str();
  correspond_cmd->add_option("--src-mask", corr.src_mask, "Source label mask [H,W] u16");
  correspond_cmd->add_option("--ref-mask", corr.ref_mask, "Exemplar label mask [H,W] u16");
  correspond_cmd->add_option("--tol", corr.tol, "Marginal tolerance")->capture_default_str();
  correspond_cmd->add_option("--max-iters", corr.max_iters, "Iteration cap")->capture_default_str();

  WarpArgs warp;
  auto* warp_cmd = app.add_subcommand("warp", "Warp an exemplar style map through a plan");
  warp_cmd->add_option("--style", warp.style, "Exemplar style [S,H,W]")->required();
  warp_cmd->add_option("--plan", warp.plan, "Plan written by correspond")->required();
  warp_cmd->add_option("--out", warp.out, "Warped style output")->required();

  StylizeArgs stylize;
  auto* stylize_cmd = app.add_subcommand("stylize", "Decode content with a dense style into a PPM image");
  stylize_cmd->add_option("--content", stylize.content, "Content features [C,H,W]")->required();
  stylize_cmd->add_option("--style", stylize.style, "Style map [S,H,W] on the content grid")->required();
  stylize_cmd->add_option("--weights", stylize.weights, "Toy decoder weight directory")->required();
  stylize_cmd->add_option("--out", stylize.out, "Output image (.ppm)")->required();

  MetricArgs metric;
  auto* metric_cmd = app.add_subcommand("metric", "Localized style score per class");
  metric_cmd->add_option("--src-feat", metric.src_feat, "Source metric features")->required();
  metric_cmd->add_option("--ref-feat", metric.ref_feat, "Exemplar metric features")->required();
  metric_cmd->add_option("--trans-feat", metric.trans_feat, "Translation metric features")->required();
  metric_cmd->add_option("--src-mask", metric.src_mask, "Source label mask")->required();
  metric_cmd->add_option("--ref-mask", metric.ref_mask, "Exemplar label mask")->required();
  metric_cmd->add_option("--out", metric.out, "JSON report path")->required();

  MassesArgs masses;
  auto* masses_cmd = app.add_subcommand("masses", "Write exemplar transport masses");
  masses_cmd->add_option("--mass", masses.mass, "uniform | estimated | labels")
      ->check(CLI::IsMember({"uniform", "estimated", "labels"}))
      ->capture_default_str();
  masses_cmd->add_option("--src-feat", masses.src_feat, "Source features");
  masses_cmd->add_option("--ref-feat", masses.ref_feat, "Exemplar features");
  masses_cmd->add_option("--src-mask", masses.src_mask, "Source label mask");
  masses_cmd->add_option("--ref-mask", masses.ref_mask, "Exemplar label mask");
  masses_cmd->add_option("--out", masses.out, "Masses output (DST1 [Ny])")->required();

  std::string info_path;
  auto* info_cmd = app.add_subcommand("info", "Print dtype, dims and value range of a DST1 file");
  info_cmd->add_option("file", info_path, "DST1 file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (*correspond_cmd) return cmd_correspond(corr, err);
    if (*warp_cmd) return cmd_warp(warp, err);
    if (*stylize_cmd) return cmd_stylize(stylize, err);
    if (*metric_cmd) return cmd_metric(metric, err);
    if (*masses_cmd) return cmd_masses(masses, err);
    if (*info_cmd) return cmd_info(info_path, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NoConvergence& e) {
    err << "error: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const UnmatchedColumnError& e) {
    err << "error: " << e.what() << " (source position " << e.column() << " is unmatched)\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace dsk::cli
