#pragma once

#include <vector>

#include "cdgad/types.hpp"

namespace cdgad::diff {

// State of the ADAM recurrence for one parameter set. Moment accumulators
// mirror the parameter shapes; `step_count` is the t of the bias correction.
struct AdamState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  long step_count = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState create(const std::vector<const Matrix*>& params, double lr);
};

// One ADAM update: m/v accumulation, bias correction, in-place parameter
// step. Zero gradients on a fresh state leave parameters untouched.
void adam_step(const std::vector<Matrix*>& params,
               const std::vector<const Matrix*>& grads, AdamState& state);

}  // namespace cdgad::diff
