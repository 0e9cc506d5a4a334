#include "cdgad/losses.hpp"

namespace cdgad {

using diff::Tape;
using diff::Var;

Var contrastive_loss(Tape& tape, Var z_u, Var z_v, Var z_vn, int negatives_per_centre) {
  const auto& u = tape.value(z_u);
  const auto& v = tape.value(z_v);
  const auto& vn = tape.value(z_vn);
  if (u.rows() != v.rows() || u.cols() != v.cols()) {
    throw StructuralError("contrastive_loss: centre/positive blocks disagree");
  }
  if (negatives_per_centre < 1 || vn.rows() != u.rows() * negatives_per_centre ||
      vn.cols() != u.cols()) {
    throw StructuralError("contrastive_loss: negative block must hold Q rows per centre");
  }
  const int batch = static_cast<int>(u.rows());
  const int q = negatives_per_centre;

  // pair each centre row with its Q negatives
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(batch) * q);
  for (int i = 0; i < batch; ++i) {
    for (int k = 0; k < q; ++k) entries.emplace_back(i * q + k, i, 1.0);
  }
  auto repeat = std::make_shared<SparseMatrix>(batch * q, batch);
  repeat->setFromTriplets(entries.begin(), entries.end());
  repeat->makeCompressed();

  Var pos_dots = row_sum(hadamard(z_u, z_v));
  Var neg_dots = row_sum(hadamard(sparse_premul(repeat, z_u), z_vn));
  Var pos_term = mean_all(-log_clamped(sigmoid(pos_dots)));
  // Q * E over the negative distribution, estimated by the Q samples
  Var neg_term = static_cast<double>(q) * mean_all(-log_clamped(sigmoid(-neg_dots)));
  return pos_term + neg_term;
}

ContrastiveResult contrastive_loss(const Matrix& z_u, const Matrix& z_v,
                                   const Matrix& z_vn, int negatives_per_centre) {
  Tape tape;
  Var u = tape.parameter(z_u);
  Var v = tape.parameter(z_v);
  Var vn = tape.parameter(z_vn);
  Var loss = contrastive_loss(tape, u, v, vn, negatives_per_centre);
  ContrastiveResult result;
  result.value = tape.scalar_value(loss);
  tape.backward(loss);
  result.grad_u = tape.gradient(u);
  result.grad_v = tape.gradient(v);
  result.grad_vn = tape.gradient(vn);
  return result;
}

}  // namespace cdgad
