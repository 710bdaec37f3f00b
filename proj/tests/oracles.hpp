#pragma once

// Reference computations used only by tests. Each one is the most direct
// transcription of its formula (explicit loops, no shared helpers from the
// library) so it fails independently of the code it checks.

#include <cstddef>

#include "dsk/numeric.hpp"

namespace dsk::oracle {

struct SinkhornResult {
  Matrix plan;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool reached = false;
};

/// Plain fixed point u = p / (K v), v = q / (K^T u) with K = exp(-C / lambda),
/// run until the row residual is <= tol or `max_iterations` is spent.
SinkhornResult sinkhorn_fixed_point(const Matrix& cost, const Vector& p, const Vector& q, double lambda,
                                    double tol = 1e-12, std::size_t max_iterations = 20'000'000);

/// Two-pass mean and population variance per column.
void column_moments(const Matrix& m, Vector& mean, Vector& variance);

/// out[c, l] = (P[c, l] - mu[l]) / sqrt(var[l] + eps) * beta[c, l] + alpha[c, l].
Matrix dnorm_direct(const Matrix& p, const Matrix& alpha, const Matrix& beta, double eps);

Matrix matmul_direct(const Matrix& a, const Matrix& b);

/// (1 / n) sum over selected columns of f f^T via explicit triple loop.
Matrix gram_direct(const Matrix& features, const std::vector<bool>& selected);

}  // namespace dsk::oracle
