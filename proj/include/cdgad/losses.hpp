#pragma once

#include "cdgad/diff/tape.hpp"
#include "cdgad/types.hpp"

namespace cdgad {

// ---------------------------------------------------------------------------
// Topology contrastive loss.
//
// Per centre u with positive v and Q sampled negatives v_n:
//   -log sigma(z_u . z_v) - Q * mean_q log sigma(-z_u . z_{v_n,q})
// averaged over the batch. Negatives are row-major, Q per centre.
// ---------------------------------------------------------------------------
diff::Var contrastive_loss(diff::Tape& tape, diff::Var z_u, diff::Var z_v, diff::Var z_vn,
                           int negatives_per_centre);

struct ContrastiveResult {
  double value = 0.0;
  Matrix grad_u, grad_v, grad_vn;
};
ContrastiveResult contrastive_loss(const Matrix& z_u, const Matrix& z_v,
                                   const Matrix& z_vn, int negatives_per_centre);

// ---------------------------------------------------------------------------
// Deviation loss.
//
// dev = (score - mu) / sigma; per node:
//   (1 - y) |dev| + y max(0, margin - dev)
// pulls normal scores toward the Gaussian reference and pushes anomaly
// scores at least `margin` reference deviations above it.
// ---------------------------------------------------------------------------
struct DeviationConfig {
  double mu = 0.0;
  double sigma = 1.0;
  double margin = 5.0;  // a
  // estimate (mu, sigma) per batch from draws of the Gaussian prior instead
  // of plugging the constants in directly
  bool reference_sampling = false;
  int reference_size = 5000;

  void validate() const;
};

diff::Var deviation_loss(diff::Tape& tape, diff::Var scores, const Vector& labels,
                         double mu, double sigma, double margin);

struct DeviationResult {
  double value = 0.0;
  Vector grad_scores;
};
DeviationResult deviation_loss(const Vector& scores, const std::vector<int>& labels,
                               const DeviationConfig& cfg);

// (mu, sigma) to plug into the loss: the configured constants, or, with
// reference_sampling on, the mean and population std of `reference_size`
// fresh draws from the Gaussian prior.
std::pair<double, double> deviation_reference(const DeviationConfig& cfg,
                                              class Rng& rng);

// ---------------------------------------------------------------------------
// Debiased entropic optimal-transport divergence between two point clouds
// with uniform weights and squared Euclidean ground cost:
//   S(a, b) = OT_eps(a, b) - OT_eps(a, a)/2 - OT_eps(b, b)/2.
// Dual potentials are iterated in log domain with Jacobi (parallel) updates,
// which makes the value exactly symmetric in its arguments and exactly zero
// at equal clouds. The gradient w.r.t. the target cloud treats the converged
// potentials as fixed (dual envelope), which is exact at convergence.
// ---------------------------------------------------------------------------
struct SinkhornConfig {
  double epsilon = 0.05;
  int max_iterations = 200;
  double tolerance = 1e-6;  // sup-norm change of the dual potentials

  void validate() const;
};

struct SinkhornResult {
  double value = 0.0;
  Matrix grad_target;  // d value / d target rows
  bool converged = false;
  int iterations = 0;
};

SinkhornResult sinkhorn_divergence(const Matrix& source, const Matrix& target,
                                   const SinkhornConfig& cfg);

// Value-only variant that skips the gradient work.
double sinkhorn_divergence_value(const Matrix& source, const Matrix& target,
                                 const SinkhornConfig& cfg);

}  // namespace cdgad
