#pragma once

#include <functional>
#include <vector>

#include "cdgad/diff/tape.hpp"

namespace cdgad::diff {

// Builds a scalar expression from parameter leaves already registered on the
// tape (one Var per input matrix, in order).
using ExprBuilder = std::function<Var(Tape&, const std::vector<Var>&)>;

struct Evaluation {
  double value = 0.0;
  std::vector<Matrix> gradients;  // one per input, same shapes
};

// Evaluates the expression at `inputs` and returns the value together with
// the reverse-mode gradient for every input.
Evaluation evaluate_with_gradients(const ExprBuilder& build,
                                   const std::vector<Matrix>& inputs);

// Compares the analytic gradient of `build` against central finite
// differences, coordinate by coordinate, and returns the worst relative
// error with denominator max(|analytic|, |numeric|, 1e-8).
double finite_difference_check(const ExprBuilder& build,
                               const std::vector<Matrix>& inputs, double h);

// Same comparison for externally supplied analytic gradients of an arbitrary
// value function (used where part of the gradient is computed outside the
// tape, e.g. transport-plan envelopes).
double finite_difference_check(const std::function<double(const std::vector<Matrix>&)>& value_fn,
                               const std::vector<Matrix>& inputs,
                               const std::vector<Matrix>& analytic_grads, double h);

}  // namespace cdgad::diff
