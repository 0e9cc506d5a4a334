#include "cdgad/losses.hpp"

#include "cdgad/rng.hpp"

namespace cdgad {

using diff::Tape;
using diff::Var;

void DeviationConfig::validate() const {
  if (sigma <= 0.0) throw ConfigError("deviation: sigma must be positive");
  if (margin <= 0.0) throw ConfigError("deviation: margin must be positive");
  if (reference_sampling && reference_size < 2) {
    throw ConfigError("deviation: reference_size must be >= 2");
  }
}

Var deviation_loss(Tape& tape, Var scores, const Vector& labels, double mu, double sigma,
                   double margin) {
  if (sigma <= 0.0) throw ConfigError("deviation: sigma must be positive");
  const auto& s = tape.value(scores);
  if (s.cols() != 1 || s.rows() != labels.size()) {
    throw StructuralError("deviation_loss: scores must be n x 1 matching the labels");
  }
  const Eigen::Index n = labels.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels(i) != 0.0 && labels(i) != 1.0) {
      throw StructuralError("deviation_loss: labels must be 0 or 1");
    }
  }
  Var dev = add_scalar((1.0 / sigma) * scores, tape.constant_scalar(-mu / sigma));
  Var normal_mask = tape.constant(Matrix::Ones(n, 1) - labels);
  Var anomaly_mask = tape.constant(labels);
  Var margin_gap = relu(add_scalar(-dev, tape.constant_scalar(margin)));
  return mean_all(hadamard(normal_mask, abs(dev)) + hadamard(anomaly_mask, margin_gap));
}

std::pair<double, double> deviation_reference(const DeviationConfig& cfg, Rng& rng) {
  cfg.validate();
  if (!cfg.reference_sampling) return {cfg.mu, cfg.sigma};
  Vector draws(cfg.reference_size);
  for (int i = 0; i < cfg.reference_size; ++i) {
    draws(i) = cfg.mu + cfg.sigma * rng.normal();
  }
  const double mean = draws.mean();
  const double var = (draws.array() - mean).square().mean();
  return {mean, std::sqrt(var)};
}

DeviationResult deviation_loss(const Vector& scores, const std::vector<int>& labels,
                               const DeviationConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(scores.size()) != labels.size()) {
    throw StructuralError("deviation_loss: score/label length mismatch");
  }
  Vector y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y(i) = labels[i];

  Tape tape;
  Var s = tape.parameter(scores);
  Var loss = deviation_loss(tape, s, y, cfg.mu, cfg.sigma, cfg.margin);
  DeviationResult result;
  result.value = tape.scalar_value(loss);
  tape.backward(loss);
  result.grad_scores = tape.gradient(s);
  return result;
}

}  // namespace cdgad
