#include "cdgad/diff/check.hpp"

#include <algorithm>
#include <cmath>

namespace cdgad::diff {

Evaluation evaluate_with_gradients(const ExprBuilder& build,
                                   const std::vector<Matrix>& inputs) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(inputs.size());
  for (const Matrix& x : inputs) leaves.push_back(tape.parameter(x));
  Var out = build(tape, leaves);
  Evaluation result;
  result.value = tape.scalar_value(out);
  tape.backward(out);
  result.gradients.reserve(leaves.size());
  for (Var leaf : leaves) result.gradients.push_back(tape.gradient(leaf));
  return result;
}

double finite_difference_check(const ExprBuilder& build,
                               const std::vector<Matrix>& inputs, double h) {
  const Evaluation eval = evaluate_with_gradients(build, inputs);
  auto value_at = [&](const std::vector<Matrix>& x) {
    Tape tape;
    std::vector<Var> leaves;
    for (const Matrix& m : x) leaves.push_back(tape.parameter(m));
    return tape.scalar_value(build(tape, leaves));
  };
  return finite_difference_check(value_at, inputs, eval.gradients, h);
}

double finite_difference_check(const std::function<double(const std::vector<Matrix>&)>& value_fn,
                               const std::vector<Matrix>& inputs,
                               const std::vector<Matrix>& analytic_grads, double h) {
  if (h <= 0.0) throw ConfigError("finite_difference_check: h must be positive");
  if (analytic_grads.size() != inputs.size()) {
    throw StructuralError("finite_difference_check: gradient count mismatch");
  }
  double worst = 0.0;
  std::vector<Matrix> probe = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (Eigen::Index i = 0; i < inputs[k].size(); ++i) {
      const double saved = probe[k].data()[i];
      probe[k].data()[i] = saved + h;
      const double up = value_fn(probe);
      probe[k].data()[i] = saved - h;
      const double down = value_fn(probe);
      probe[k].data()[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = analytic_grads[k].data()[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace cdgad::diff
