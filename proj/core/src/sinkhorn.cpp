#include "dsk/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "dsk/error.hpp"
#include "dsk/parallel.hpp"

namespace dsk {

std::string_view to_string(MassMode mode) noexcept {
  switch (mode) {
    case MassMode::uniform: return "uniform";
    case MassMode::estimated: return "estimated";
    case MassMode::labels: return "labels";
  }
  return "?";
}

MassMode parse_mass_mode(std::string_view name) {
  if (name == "uniform") return MassMode::uniform;
  if (name == "estimated") return MassMode::estimated;
  if (name == "labels") return MassMode::labels;
  throw std::invalid_argument("unknown mass mode '" + std::string(name) + "'");
}

void CorrespondenceConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be > 0");
  if (!(marginal_tolerance > 0.0)) throw std::invalid_argument("marginal tolerance must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
}

void check_probability_vector(const Vector& p, std::string_view what) {
  if (p.size() == 0) throw std::invalid_argument(std::string(what) + " is empty");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < 0.0) {
      throw std::invalid_argument(std::string(what) + " has a negative or non-finite entry at " +
                                  std::to_string(i));
    }
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument(std::string(what) + " sums to " + std::to_string(sum) + ", not 1");
  }
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kLogFloor = -700.0;
constexpr double kScalingHigh = 1e30;
constexpr double kScalingLow = 1e-30;
// Below this many kernel entries thread start-up costs more than it saves.
constexpr std::size_t kParallelThreshold = 1 << 16;
// Scaling iterations before the contraction rate is trusted.
constexpr std::size_t kRateWarmup = 30;
constexpr std::size_t kRateWindow = 10;
// Hand over to Newton when scaling is projected to need more than this.
constexpr double kMaxProjectedScaling = 300.0;
// Largest reduced Newton system solved by dense factorization.
constexpr Eigen::Index kDenseNewtonLimit = 1024;

// Shared layout for both phases: A_ij = exp(x_i + y_j + s_ij), s = -C / lambda.
// Rows/columns with zero mass are excluded from the active problem and stay 0.
struct Problem {
  RowMatrix neg_scaled;
  const Vector& p;
  const Vector& q;
  std::size_t threads;

  Eigen::Index rows() const { return neg_scaled.rows(); }
  Eigen::Index cols() const { return neg_scaled.cols(); }

  void gibbs(const Vector& x, const Vector& y, RowMatrix& out) const {
    out.resize(rows(), cols());
    parallel_for(static_cast<std::size_t>(rows()), threads, [&](std::size_t begin, std::size_t end) {
      for (auto i = static_cast<Eigen::Index>(begin); i < static_cast<Eigen::Index>(end); ++i) {
        if (p[i] == 0.0) {
          out.row(i).setZero();
          continue;
        }
        for (Eigen::Index j = 0; j < cols(); ++j) {
          out(i, j) = q[j] == 0.0 ? 0.0 : std::exp(x[i] + y[j] + neg_scaled(i, j));
        }
      }
    });
  }

  // out = K v
  void apply(const RowMatrix& k, const Vector& v, Vector& out) const {
    out.resize(k.rows());
    parallel_for(static_cast<std::size_t>(k.rows()), threads, [&](std::size_t begin, std::size_t end) {
      for (auto i = static_cast<Eigen::Index>(begin); i < static_cast<Eigen::Index>(end); ++i) {
        out[i] = k.row(i).dot(v.transpose());
      }
    });
  }

  // out = K^T u, accumulated row by row in fixed order inside each column block.
  void apply_transpose(const RowMatrix& k, const Vector& u, Vector& out) const {
    out.setZero(k.cols());
    parallel_for(static_cast<std::size_t>(k.cols()), threads, [&](std::size_t begin, std::size_t end) {
      const auto start = static_cast<Eigen::Index>(begin);
      const auto width = static_cast<Eigen::Index>(end - begin);
      auto seg = out.segment(start, width);
      for (Eigen::Index i = 0; i < k.rows(); ++i) {
        if (u[i] != 0.0) seg += u[i] * k.row(i).segment(start, width).transpose();
      }
    });
  }

  double row_violation(const Vector& row_sums) const {
    return (row_sums - p).cwiseAbs().maxCoeff();
  }
};

double safe_log(double x) { return x > 0.0 ? std::max(std::log(x), kLogFloor) : kLogFloor; }

struct Potentials {
  Vector x, y;
};

enum class ScalingExit { converged, budget, slow, infeasible };

struct ScalingResult {
  Potentials best;
  double best_error = std::numeric_limits<double>::infinity();
  std::size_t best_iterations = 0;
  std::size_t iterations = 0;
  ScalingExit exit = ScalingExit::budget;
};

// Stabilized scaling iterations: kernel K = exp(a_i + b_j + s_ij) with
// scalings (u, v); (a, b) absorb log u, log v whenever they drift.
ScalingResult run_scaling(const Problem& pr, Potentials start, const CorrespondenceConfig& cfg) {
  const Eigen::Index rows = pr.rows();
  const Eigen::Index cols = pr.cols();
  const Vector& p = pr.p;
  const Vector& q = pr.q;
  Vector a = std::move(start.x);
  Vector b = std::move(start.y);

  RowMatrix kernel;
  pr.gibbs(a, b, kernel);
  Vector u = (p.array() > 0.0).cast<double>().matrix();
  Vector v = (q.array() > 0.0).cast<double>().matrix();

  auto current = [&] {
    Potentials pot{a, b};
    for (Eigen::Index i = 0; i < rows; ++i) pot.x[i] = p[i] == 0.0 ? kLogFloor : a[i] + safe_log(u[i]);
    for (Eigen::Index j = 0; j < cols; ++j) pot.y[j] = q[j] == 0.0 ? kLogFloor : b[j] + safe_log(v[j]);
    return pot;
  };
  auto drifted = [](const Vector& s, const Vector& mass) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (mass[i] > 0.0 && (s[i] > kScalingHigh || s[i] < kScalingLow)) return true;
    }
    return false;
  };

  ScalingResult result;
  std::vector<double> history;
  Vector kv(rows);
  Vector ktu(cols);
  while (true) {
    pr.apply(kernel, v, kv);
    if (result.iterations > 0) {
      // Columns are exact after the v-update; rows carry the whole violation.
      const double error = pr.row_violation(u.cwiseProduct(kv));
      history.push_back(error);
      if (error < result.best_error) {
        result.best_error = error;
        result.best = current();
        result.best_iterations = result.iterations;
      }
      if (error <= cfg.marginal_tolerance) {
        result.exit = ScalingExit::converged;
        break;
      }
      if (result.iterations >= cfg.max_iterations) {
        result.exit = ScalingExit::budget;
        break;
      }
      if (history.size() > kRateWarmup) {
        const double older = history[history.size() - 1 - kRateWindow];
        const double rate = std::pow(error / older, 1.0 / static_cast<double>(kRateWindow));
        const double projected =
            rate < 1.0 ? std::log(cfg.marginal_tolerance / error) / std::log(rate)
                       : std::numeric_limits<double>::infinity();
        if (projected > kMaxProjectedScaling) {
          result.exit = ScalingExit::slow;
          break;
        }
      }
    }

    bool infeasible = false;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (p[i] == 0.0) {
        u[i] = 0.0;
      } else if (kv[i] > 0.0) {
        u[i] = p[i] / kv[i];
      } else {
        infeasible = true;
      }
    }
    pr.apply_transpose(kernel, u, ktu);
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (q[j] == 0.0) {
        v[j] = 0.0;
      } else if (ktu[j] > 0.0) {
        v[j] = q[j] / ktu[j];
      } else {
        infeasible = true;
      }
    }
    ++result.iterations;

    if (infeasible) {
      // A positive-mass row or column sees only forbidden (+inf) pairs.
      result.exit = ScalingExit::infeasible;
      if (result.best.x.size() == 0) {
        result.best = current();
        result.best_iterations = result.iterations;
      }
      break;
    }

    if (drifted(u, p) || drifted(v, q)) {
      const Potentials absorbed = current();
      a = absorbed.x;
      b = absorbed.y;
      pr.gibbs(a, b, kernel);
      u = (p.array() > 0.0).cast<double>().matrix();
      v = (q.array() > 0.0).cast<double>().matrix();
    }
  }
  return result;
}

// psi(x, y) = <x, p> + <y, q> - sum A, concave; maximized at the coupling.
double dual_objective(const Problem& pr, const Potentials& pot, const RowMatrix& plan) {
  double value = -plan.sum();
  for (Eigen::Index i = 0; i < pr.rows(); ++i) {
    if (pr.p[i] > 0.0) value += pot.x[i] * pr.p[i];
  }
  for (Eigen::Index j = 0; j < pr.cols(); ++j) {
    if (pr.q[j] > 0.0) value += pot.y[j] * pr.q[j];
  }
  return value;
}

// Solves the reduced Newton system on the "kept" side:
//   (D_keep - B E^-1 B^T) d = rhs,
// with B the plan oriented kept-side x eliminated-side. The system is a
// weighted graph Laplacian (null vector 1); the gauge is fixed by d.back() = 0
// for the dense path and by mean removal for CG.
Vector solve_reduced(const Matrix& b, const Vector& d_keep, const Vector& e_elim, const Vector& rhs) {
  const Eigen::Index n = d_keep.size();
  if (n == 1) return Vector::Zero(1);
  const Vector e_inv = e_elim.cwiseInverse();

  if (n <= kDenseNewtonLimit) {
    Matrix schur = -(b * e_inv.asDiagonal() * b.transpose());
    schur.diagonal() += d_keep;
    const Eigen::Index m = n - 1;
    Eigen::LDLT<Matrix> ldlt(schur.topLeftCorner(m, m));
    Vector d = Vector::Zero(n);
    d.head(m) = ldlt.solve(rhs.head(m));
    return d;
  }

  // Jacobi-preconditioned CG on the consistent singular system.
  Vector diag = d_keep - (b.array().square().matrix() * e_inv);
  diag = diag.cwiseMax(1e-300);
  auto op = [&](const Vector& z) -> Vector {
    return d_keep.cwiseProduct(z) - b * e_inv.cwiseProduct(b.transpose() * z);
  };
  Vector x = Vector::Zero(n);
  Vector r = rhs;
  r.array() -= r.mean();
  Vector z = r.cwiseQuotient(diag);
  Vector dir = z;
  double rz = r.dot(z);
  const double stop = 1e-12 * std::max(1.0, rhs.norm());
  for (int it = 0; it < 4 * n && r.norm() > stop; ++it) {
    const Vector ad = op(dir);
    const double denom = dir.dot(ad);
    if (!(denom > 0.0)) break;
    const double alpha = rz / denom;
    x += alpha * dir;
    r -= alpha * ad;
    z = r.cwiseQuotient(diag);
    const double rz_next = r.dot(z);
    dir = z + (rz_next / rz) * dir;
    rz = rz_next;
  }
  x.array() -= x.mean();
  return x;
}

struct NewtonResult {
  Potentials pot;
  std::size_t steps = 0;
};

// Damped Newton ascent on psi over the active (positive-mass) rows/columns.
NewtonResult run_newton(const Problem& pr, Potentials pot, const CorrespondenceConfig& cfg, std::size_t budget) {
  std::vector<Eigen::Index> rows_on, cols_on;
  for (Eigen::Index i = 0; i < pr.rows(); ++i) {
    if (pr.p[i] > 0.0) rows_on.push_back(i);
  }
  for (Eigen::Index j = 0; j < pr.cols(); ++j) {
    if (pr.q[j] > 0.0) cols_on.push_back(j);
  }
  const auto nr = static_cast<Eigen::Index>(rows_on.size());
  const auto nc = static_cast<Eigen::Index>(cols_on.size());

  RowMatrix plan;
  pr.gibbs(pot.x, pot.y, plan);
  double objective = dual_objective(pr, pot, plan);

  NewtonResult result{pot, 0};
  while (result.steps < budget) {
    Matrix active(nr, nc);
    for (Eigen::Index i = 0; i < nr; ++i) {
      for (Eigen::Index j = 0; j < nc; ++j) active(i, j) = plan(rows_on[i], cols_on[j]);
    }
    const Vector row_sums = active.rowwise().sum();
    const Vector col_sums = active.colwise().sum().transpose();
    Vector grad_x(nr), grad_y(nc);
    for (Eigen::Index i = 0; i < nr; ++i) grad_x[i] = pr.p[rows_on[i]] - row_sums[i];
    for (Eigen::Index j = 0; j < nc; ++j) grad_y[j] = pr.q[cols_on[j]] - col_sums[j];
    const double violation = std::max(grad_x.cwiseAbs().maxCoeff(), grad_y.cwiseAbs().maxCoeff());
    if (violation <= cfg.marginal_tolerance) break;
    if ((row_sums.array() <= 0.0).any() || (col_sums.array() <= 0.0).any()) break;

    Vector dx, dy;
    if (nc <= nr) {
      dy = solve_reduced(active.transpose(), col_sums, row_sums,
                         grad_y - active.transpose() * grad_x.cwiseQuotient(row_sums));
      dx = (grad_x - active * dy).cwiseQuotient(row_sums);
    } else {
      dx = solve_reduced(active, row_sums, col_sums, grad_x - active * grad_y.cwiseQuotient(col_sums));
      dy = (grad_y - active.transpose() * dx).cwiseQuotient(col_sums);
    }
    if (!dx.allFinite() || !dy.allFinite()) break;

    const double slope = grad_x.dot(dx) + grad_y.dot(dy);
    if (!(slope > 0.0)) break;

    double step = 1.0;
    bool accepted = false;
    Potentials trial = result.pot;
    RowMatrix trial_plan;
    while (step > 1e-12) {
      trial = result.pot;
      for (Eigen::Index i = 0; i < nr; ++i) trial.x[rows_on[i]] += step * dx[i];
      for (Eigen::Index j = 0; j < nc; ++j) trial.y[cols_on[j]] += step * dy[j];
      pr.gibbs(trial.x, trial.y, trial_plan);
      const double value = dual_objective(pr, trial, trial_plan);
      if (std::isfinite(value) && value >= objective + 1e-4 * step * slope) {
        objective = value;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++result.steps;
    if (!accepted) break;
    result.pot = std::move(trial);
    plan = std::move(trial_plan);
  }
  return result;
}

}  // namespace

TransportPlan sinkhorn(const Matrix& cost, const Vector& row_marginals, const Vector& col_marginals,
                       const CorrespondenceConfig& cfg) {
  cfg.validate();
  const Eigen::Index rows = cost.rows();
  const Eigen::Index cols = cost.cols();
  if (rows != row_marginals.size() || cols != col_marginals.size()) {
    throw ShapeError("cost is " + std::to_string(rows) + "x" + std::to_string(cols) + " but marginals have " +
                     std::to_string(row_marginals.size()) + " and " + std::to_string(col_marginals.size()) +
                     " entries");
  }
  check_probability_vector(row_marginals, "row marginal");
  check_probability_vector(col_marginals, "column marginal");

  const Vector& p = row_marginals;
  const Vector& q = col_marginals;
  std::size_t threads = cfg.threads == 0 ? thread_count_from_env() : cfg.threads;
  if (static_cast<std::size_t>(rows * cols) < kParallelThreshold) threads = 1;

  Problem pr{RowMatrix(rows, cols), p, q, threads};
  Potentials start{Vector(rows), Vector::Zero(cols)};
  for (Eigen::Index i = 0; i < rows; ++i) {
    double row_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double c = cost(i, j);
      if (std::isnan(c) || c == -std::numeric_limits<double>::infinity()) {
        throw std::invalid_argument("cost entry (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") is NaN or -inf");
      }
      pr.neg_scaled(i, j) = -c / cfg.lambda;
      row_min = std::min(row_min, c);
    }
    // Start each row with its largest kernel entry at 1.
    start.x[i] = p[i] == 0.0 ? kLogFloor : (std::isfinite(row_min) ? row_min / cfg.lambda : 0.0);
  }
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (q[j] == 0.0) start.y[j] = kLogFloor;
  }

  ScalingResult scaling = run_scaling(pr, std::move(start), cfg);
  Potentials final_pot = scaling.best;
  std::size_t iterations = scaling.best_iterations;
  if (scaling.exit == ScalingExit::slow || scaling.exit == ScalingExit::budget) {
    const std::size_t budget = cfg.max_iterations - std::min(cfg.max_iterations, scaling.iterations);
    if (budget > 0) {
      NewtonResult newton = run_newton(pr, scaling.best, cfg, budget);
      final_pot = std::move(newton.pot);
      iterations = scaling.iterations + newton.steps;
    }
  }

  RowMatrix values;
  pr.gibbs(final_pot.x, final_pot.y, values);

  TransportPlan plan;
  plan.values = values;
  plan.row_marginals = p;
  plan.col_marginals = q;
  plan.iterations_used = iterations;
  plan.achieved_tolerance = marginal_violation(plan);
  plan.converged = scaling.exit != ScalingExit::infeasible && plan.achieved_tolerance <= cfg.marginal_tolerance;
  return plan;
}

double transport_cost(const TransportPlan& plan, const Matrix& cost) {
  if (cost.rows() != plan.values.rows() || cost.cols() != plan.values.cols()) {
    throw ShapeError("cost and plan shapes differ");
  }
  double total = 0.0;
  for (Eigen::Index j = 0; j < cost.cols(); ++j) {
    for (Eigen::Index i = 0; i < cost.rows(); ++i) {
      const double a = plan.values(i, j);
      if (a != 0.0) total += a * cost(i, j);
    }
  }
  return total;
}

double marginal_violation(const TransportPlan& plan) {
  const Vector row_sums = plan.values.rowwise().sum();
  const Vector col_sums = plan.values.colwise().sum().transpose();
  double worst = 0.0;
  if (row_sums.size() == plan.row_marginals.size()) {
    worst = std::max(worst, (row_sums - plan.row_marginals).cwiseAbs().maxCoeff());
  }
  if (col_sums.size() == plan.col_marginals.size()) {
    worst = std::max(worst, (col_sums - plan.col_marginals).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace dsk
