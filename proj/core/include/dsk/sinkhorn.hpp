#pragma once

#include <cstddef>
#include <string_view>

#include "dsk/numeric.hpp"

namespace dsk {

enum class MassMode {
  uniform,    // p_y uniform
  estimated,  // p_y from feature self/cross similarity
  labels,     // p_y from class-area ratios
};

std::string_view to_string(MassMode mode) noexcept;
/// Throws std::invalid_argument on an unknown name.
MassMode parse_mass_mode(std::string_view name);

struct CorrespondenceConfig {
  double lambda = 0.05;
  std::size_t max_iterations = 1000;
  double marginal_tolerance = 1e-8;
  MassMode mass_mode = MassMode::estimated;
  /// Worker threads for the kernel products; 0 means thread_count_from_env().
  std::size_t threads = 1;

  /// Throws std::invalid_argument unless lambda > 0, tolerance > 0 and
  /// max_iterations >= 1.
  void validate() const;
};

/// Entropic OT coupling between exemplar positions (rows) and source
/// positions (columns).
struct TransportPlan {
  Matrix values;          // Ny x Nx, nonnegative
  Vector row_marginals;   // p_y
  Vector col_marginals;   // p_x
  double achieved_tolerance = 0.0;  // max |marginal violation| over rows and columns
  std::size_t iterations_used = 0;
  bool converged = false;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

/// Throws std::invalid_argument unless `p` is nonnegative, finite and sums
/// to 1 within 1e-9.
void check_probability_vector(const Vector& p, std::string_view what);

/// Solves min <A, C> - lambda * H(A) s.t. A 1 = p_y, A^T 1 = p_x.
///
/// Scaling iterations on a kernel whose log-potentials are re-absorbed
/// whenever the scalings drift outside [1e-30, 1e30], so small lambda never
/// under- or overflows. When the observed contraction rate projects more
/// than a few hundred further scaling iterations (near-permutation
/// couplings), the remaining budget goes to damped Newton steps on the same
/// dual, which converge to the same coupling A = diag(u) exp(-C/lambda) diag(v).
/// Each scaling sweep or Newton step counts as one iteration.
///
/// Rows and columns with zero mass are held at zero. Stops when the largest
/// marginal violation is <= cfg.marginal_tolerance; otherwise returns the
/// last accepted iterate with converged = false. Costs may be +inf
/// (forbidden pairs) but not NaN or -inf.
TransportPlan sinkhorn(const Matrix& cost, const Vector& row_marginals, const Vector& col_marginals,
                       const CorrespondenceConfig& cfg);

/// <A, C>, skipping entries where A is zero.
double transport_cost(const TransportPlan& plan, const Matrix& cost);

/// Largest absolute row/column marginal violation of `plan.values`.
double marginal_violation(const TransportPlan& plan);

}  // namespace dsk
