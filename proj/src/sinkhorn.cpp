#include <cmath>

#include "cdgad/losses.hpp"

namespace cdgad {

namespace {

struct DualSolution {
  Vector f;  // potential over source rows
  Vector g;  // potential over target rows
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Entropic OT between uniform clouds in log domain. Both potentials advance
// together from the previous iterate (damped Jacobi rather than alternating
// updates); this makes the computation an exact mirror of itself under
// argument swap, so ot(x, y).value == ot(y, x).value bit for bit. The blur
// is annealed from the cost scale down to the requested epsilon, which keeps
// the iteration count manageable at sharp epsilons; the schedule depends
// only on swap-symmetric quantities.
DualSolution entropic_ot(const Matrix& x, const Matrix& y, const SinkhornConfig& cfg) {
  const Eigen::Index n = x.rows();
  const Eigen::Index m = y.rows();
  const double log_a = -std::log(static_cast<double>(n));
  const double log_b = -std::log(static_cast<double>(m));

  // cost(i, j) = |x_i - y_j|^2, kept in both orientations so every
  // log-sum-exp scans a contiguous column
  Matrix cost(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      cost(i, j) = (x.row(i) - y.row(j)).squaredNorm();
    }
  }
  Matrix cost_t = cost.transpose();

  DualSolution sol;
  sol.f = Vector::Zero(n);
  sol.g = Vector::Zero(m);
  Vector f_new(n), g_new(m), scratch_m(m), scratch_n(n);

  auto lse_column = [](const auto& col, const Vector& dual, double log_w,
                       double inv_eps, Vector& scratch) {
    scratch = (log_w + (dual.array() - col.array()) * inv_eps).matrix();
    const double peak = scratch.maxCoeff();
    return peak + std::log((scratch.array() - peak).exp().sum());
  };

  // annealing schedule sized to at most half the iteration budget
  double stage_eps = std::max(cfg.epsilon, cost.maxCoeff() / 4.0);
  int stages = 0;
  for (double e = stage_eps; e > cfg.epsilon; e *= 0.5) ++stages;
  int warm_per_stage = 0;
  if (stages > 0) {
    warm_per_stage = std::max(1, std::min(3, cfg.max_iterations / (2 * stages)));
  }
  int warm_left = stages > 0 ? warm_per_stage : 0;

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const double eps = warm_left > 0 ? stage_eps : cfg.epsilon;
    const double inv_eps = 1.0 / eps;
    for (Eigen::Index i = 0; i < n; ++i) {
      f_new(i) = -eps * lse_column(cost_t.col(i), sol.g, log_b, inv_eps, scratch_m);
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      g_new(j) = -eps * lse_column(cost.col(j), sol.f, log_a, inv_eps, scratch_n);
    }
    f_new = 0.5 * (sol.f + f_new);
    g_new = 0.5 * (sol.g + g_new);
    const double delta = std::max((f_new - sol.f).cwiseAbs().maxCoeff(),
                                  (g_new - sol.g).cwiseAbs().maxCoeff());
    sol.f.swap(f_new);
    sol.g.swap(g_new);
    sol.iterations = it;
    if (warm_left > 0) {
      if (--warm_left == 0 && stage_eps * 0.5 > cfg.epsilon) {
        stage_eps *= 0.5;
        warm_left = warm_per_stage;
      }
    } else if (delta < cfg.tolerance) {
      sol.converged = true;
      break;
    }
  }
  sol.value = sol.f.sum() / static_cast<double>(n) + sol.g.sum() / static_cast<double>(m);
  return sol;
}

// gamma_ij = a_i b_j exp((f_i + g_j - C_ij) / eps)
Matrix transport_plan(const Matrix& x, const Matrix& y, const DualSolution& sol,
                      double epsilon) {
  const Eigen::Index n = x.rows();
  const Eigen::Index m = y.rows();
  const double log_ab =
      -std::log(static_cast<double>(n)) - std::log(static_cast<double>(m));
  Matrix plan(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double cost = (x.row(i) - y.row(j)).squaredNorm();
      plan(i, j) = std::exp((sol.f(i) + sol.g(j) - cost) / epsilon + log_ab);
    }
  }
  return plan;
}

void check_clouds(const Matrix& source, const Matrix& target) {
  if (source.rows() == 0 || target.rows() == 0) {
    throw StructuralError("sinkhorn: clouds must be nonempty");
  }
  if (source.cols() != target.cols()) {
    throw StructuralError("sinkhorn: point dimensions disagree (" +
                          std::to_string(source.cols()) + " vs " +
                          std::to_string(target.cols()) + ")");
  }
}

}  // namespace

void SinkhornConfig::validate() const {
  if (epsilon <= 0.0) throw ConfigError("sinkhorn: epsilon must be positive");
  if (max_iterations < 1) throw ConfigError("sinkhorn: need at least one iteration");
  if (tolerance <= 0.0) throw ConfigError("sinkhorn: tolerance must be positive");
}

double sinkhorn_divergence_value(const Matrix& source, const Matrix& target,
                                 const SinkhornConfig& cfg) {
  cfg.validate();
  check_clouds(source, target);
  const DualSolution cross = entropic_ot(source, target, cfg);
  const DualSolution self_s = entropic_ot(source, source, cfg);
  const DualSolution self_t = entropic_ot(target, target, cfg);
  return cross.value - 0.5 * self_s.value - 0.5 * self_t.value;
}

SinkhornResult sinkhorn_divergence(const Matrix& source, const Matrix& target,
                                   const SinkhornConfig& cfg) {
  cfg.validate();
  check_clouds(source, target);
  const DualSolution cross = entropic_ot(source, target, cfg);
  const DualSolution self_s = entropic_ot(source, source, cfg);
  const DualSolution self_t = entropic_ot(target, target, cfg);

  SinkhornResult result;
  result.value = cross.value - 0.5 * self_s.value - 0.5 * self_t.value;
  result.converged = cross.converged && self_s.converged && self_t.converged;
  result.iterations =
      std::max({cross.iterations, self_s.iterations, self_t.iterations});

  // envelope gradient w.r.t. target rows at the converged potentials
  const Matrix plan = transport_plan(source, target, cross, cfg.epsilon);
  const Vector cross_mass = plan.colwise().sum().transpose();
  Matrix grad =
      2.0 * (cross_mass.asDiagonal() * target - plan.transpose() * source);

  // the self term sees the target as both cost arguments
  const Matrix self_plan = transport_plan(target, target, self_t, cfg.epsilon);
  const Vector row_mass = self_plan.rowwise().sum();
  const Vector col_mass = self_plan.colwise().sum().transpose();
  Matrix self_grad =
      2.0 * ((row_mass + col_mass).asDiagonal() * target - self_plan * target -
             self_plan.transpose() * target);
  result.grad_target = grad - 0.5 * self_grad;
  return result;
}

}  // namespace cdgad
