#include "cdgad/diff/adam.hpp"

#include <cmath>

namespace cdgad::diff {

AdamState AdamState::create(const std::vector<const Matrix*>& params, double lr) {
  if (lr <= 0.0) throw ConfigError("adam: learning rate must be positive");
  AdamState s;
  s.lr = lr;
  s.first_moment.reserve(params.size());
  s.second_moment.reserve(params.size());
  for (const Matrix* p : params) {
    s.first_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
    s.second_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
  return s;
}

void adam_step(const std::vector<Matrix*>& params,
               const std::vector<const Matrix*>& grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw StructuralError("adam_step: parameter/gradient/state count mismatch");
  }
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i];
    const Matrix& g = *grads[i];
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    if (p.rows() != g.rows() || p.cols() != g.cols() || p.rows() != m.rows() ||
        p.cols() != m.cols()) {
      throw StructuralError("adam_step: shape mismatch at parameter " + std::to_string(i));
    }
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    const Matrix m_hat = m / bc1;
    const Matrix v_hat = v / bc2;
    p.array() -= state.lr * m_hat.array() / (v_hat.array().sqrt() + state.epsilon);
  }
}

}  // namespace cdgad::diff
