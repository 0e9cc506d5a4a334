#include "cdgad/diff/tape.hpp"

#include <cmath>

namespace cdgad::diff {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw StructuralError(msg);
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw StructuralError(std::string(what) + ": shape mismatch (" +
                          std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                          std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
  }
}

}  // namespace

Var Tape::emit(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

const Tape::Node& Tape::node(Var v) const {
  require(v.valid() && v.tape_ == this && v.id_ >= 0 &&
              v.id_ < static_cast<int>(nodes_.size()),
          "invalid tape handle");
  return nodes_[v.id_];
}

Var Tape::parameter(Matrix value) {
  Node n;
  n.op = Op::kParameter;
  n.value = std::move(value);
  n.requires_grad = true;
  return emit(std::move(n));
}

Var Tape::constant(Matrix value) {
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(value);
  return emit(std::move(n));
}

Var Tape::constant_scalar(double value) {
  return constant(Matrix::Constant(1, 1, value));
}

const Matrix& Tape::value(Var v) const { return node(v).value; }

double Tape::scalar_value(Var v) const {
  const Matrix& m = node(v).value;
  require(m.rows() == 1 && m.cols() == 1, "scalar_value: node is not 1x1");
  return m(0, 0);
}

Matrix Tape::gradient(Var v) const {
  const Node& n = node(v);
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::accumulate(int id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(Var output) {
  const Matrix& out = value(output);
  require(out.rows() == 1 && out.cols() == 1,
          "backward: output must be 1x1; use the seeded overload otherwise");
  backward(output, Matrix::Ones(1, 1));
}

void Tape::backward(Var output, const Matrix& seed) {
  const Node& out = node(output);
  require_same_shape(out.value, seed, "backward seed");
  for (Node& n : nodes_) n.grad.resize(0, 0);
  if (!out.requires_grad) return;
  nodes_[output.id_].grad = seed;

  for (int id = output.id_; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    const Matrix& g = n.grad;
    switch (n.op) {
      case Op::kParameter:
      case Op::kConstant:
        break;
      case Op::kAdd:
        accumulate(n.a, g);
        accumulate(n.b, g);
        break;
      case Op::kSub:
        accumulate(n.a, g);
        accumulate(n.b, -g);
        break;
      case Op::kNeg:
        accumulate(n.a, -g);
        break;
      case Op::kScale:
        accumulate(n.a, n.c * g);
        break;
      case Op::kAddScalar:
        accumulate(n.a, g);
        accumulate(n.b, Matrix::Constant(1, 1, g.sum()));
        break;
      case Op::kHadamard:
        accumulate(n.a, g.cwiseProduct(nodes_[n.b].value));
        accumulate(n.b, g.cwiseProduct(nodes_[n.a].value));
        break;
      case Op::kMatMul:
        accumulate(n.a, g * nodes_[n.b].value.transpose());
        accumulate(n.b, nodes_[n.a].value.transpose() * g);
        break;
      case Op::kSparsePremul:
        accumulate(n.a, n.sparse->transpose() * g);
        break;
      case Op::kRowSlice: {
        const Node& src = nodes_[n.a];
        Matrix gx = Matrix::Zero(src.value.rows(), src.value.cols());
        gx.middleRows(static_cast<int>(n.c), g.rows()) = g;
        accumulate(n.a, gx);
        break;
      }
      case Op::kSigmoid:
        accumulate(n.a, g.cwiseProduct(n.value.cwiseProduct(
                            (Matrix::Ones(n.value.rows(), n.value.cols()) - n.value))));
        break;
      case Op::kLogClamp: {
        const Matrix& x = nodes_[n.a].value;
        accumulate(n.a, g.binaryExpr(x, [](double gi, double xi) {
          return xi > kLogFloor ? gi / xi : 0.0;
        }));
        break;
      }
      case Op::kRelu: {
        const Matrix& x = nodes_[n.a].value;
        accumulate(n.a, g.binaryExpr(x, [](double gi, double xi) {
          return xi > 0.0 ? gi : 0.0;
        }));
        break;
      }
      case Op::kAbs: {
        const Matrix& x = nodes_[n.a].value;
        accumulate(n.a, g.binaryExpr(x, [](double gi, double xi) {
          return xi > 0.0 ? gi : (xi < 0.0 ? -gi : 0.0);
        }));
        break;
      }
      case Op::kCwiseMaxConst: {
        const Matrix& x = nodes_[n.a].value;
        const double c = n.c;
        accumulate(n.a, g.binaryExpr(x, [c](double gi, double xi) {
          return xi > c ? gi : 0.0;
        }));
        break;
      }
      case Op::kRowSum: {
        const Node& src = nodes_[n.a];
        accumulate(n.a, g * Matrix::Ones(1, src.value.cols()));
        break;
      }
      case Op::kRowMean: {
        const Node& src = nodes_[n.a];
        const double m = static_cast<double>(src.value.cols());
        accumulate(n.a, (g / m) * Matrix::Ones(1, src.value.cols()));
        break;
      }
      case Op::kSumAll: {
        const Node& src = nodes_[n.a];
        accumulate(n.a, Matrix::Constant(src.value.rows(), src.value.cols(), g(0, 0)));
        break;
      }
      case Op::kMeanAll: {
        const Node& src = nodes_[n.a];
        const double inv = 1.0 / static_cast<double>(src.value.size());
        accumulate(n.a, Matrix::Constant(src.value.rows(), src.value.cols(), g(0, 0) * inv));
        break;
      }
      case Op::kDot:
        accumulate(n.a, g(0, 0) * nodes_[n.b].value);
        accumulate(n.b, g(0, 0) * nodes_[n.a].value);
        break;
      case Op::kSquaredNorm:
        accumulate(n.a, 2.0 * g(0, 0) * nodes_[n.a].value);
        break;
    }
  }
}

namespace {

Tape& same_tape(Var x, Var y) {
  if (&x.tape() != &y.tape()) throw StructuralError("operands come from different tapes");
  return x.tape();
}

}  // namespace

Var operator+(Var x, Var y) {
  Tape& t = same_tape(x, y);
  require_same_shape(t.value(x), t.value(y), "add");
  Tape::Node n;
  n.op = Tape::Op::kAdd;
  n.a = x.id();
  n.b = y.id();
  n.value = t.value(x) + t.value(y);
  n.requires_grad = t.node(x).requires_grad || t.node(y).requires_grad;
  return t.emit(std::move(n));
}

Var operator-(Var x, Var y) {
  Tape& t = same_tape(x, y);
  require_same_shape(t.value(x), t.value(y), "sub");
  Tape::Node n;
  n.op = Tape::Op::kSub;
  n.a = x.id();
  n.b = y.id();
  n.value = t.value(x) - t.value(y);
  n.requires_grad = t.node(x).requires_grad || t.node(y).requires_grad;
  return t.emit(std::move(n));
}

Var operator-(Var x) {
  Tape& t = x.tape();
  Tape::Node n;
  n.op = Tape::Op::kNeg;
  n.a = x.id();
  n.value = -t.value(x);
  n.requires_grad = t.node(x).requires_grad;
  return t.emit(std::move(n));
}

Var operator*(double c, Var x) {
  Tape& t = x.tape();
  Tape::Node n;
  n.op = Tape::Op::kScale;
  n.a = x.id();
  n.c = c;
  n.value = c * t.value(x);
  n.requires_grad = t.node(x).requires_grad;
  return t.emit(std::move(n));
}

Var add_scalar(Var x, Var s) {
  Tape& t = same_tape(x, s);
  require(t.value(s).rows() == 1 && t.value(s).cols() == 1, "add_scalar: rhs must be 1x1");
  Tape::Node n;
  n.op = Tape::Op::kAddScalar;
  n.a = x.id();
  n.b = s.id();
  n.value = t.value(x).array() + t.value(s)(0, 0);
  n.requires_grad = t.node(x).requires_grad || t.node(s).requires_grad;
  return t.emit(std::move(n));
}

Var hadamard(Var x, Var y) {
  Tape& t = same_tape(x, y);
  require_same_shape(t.value(x), t.value(y), "hadamard");
  Tape::Node n;
  n.op = Tape::Op::kHadamard;
  n.a = x.id();
  n.b = y.id();
  n.value = t.value(x).cwiseProduct(t.value(y));
  n.requires_grad = t.node(x).requires_grad || t.node(y).requires_grad;
  return t.emit(std::move(n));
}

Var matmul(Var x, Var y) {
  Tape& t = same_tape(x, y);
  if (t.value(x).cols() != t.value(y).rows()) {
    throw StructuralError("matmul: inner dimensions disagree (" +
                          std::to_string(t.value(x).cols()) + " vs " +
                          std::to_string(t.value(y).rows()) + ")");
  }
  Tape::Node n;
  n.op = Tape::Op::kMatMul;
  n.a = x.id();
  n.b = y.id();
  n.value = t.value(x) * t.value(y);
  n.requires_grad = t.node(x).requires_grad || t.node(y).requires_grad;
  return t.emit(std::move(n));
}

Var sparse_premul(std::shared_ptr<const SparseMatrix> lhs, Var x) {
  Tape& t = x.tape();
  require(lhs != nullptr, "sparse_premul: null matrix");
  if (lhs->cols() != t.value(x).rows()) {
    throw StructuralError("sparse_premul: inner dimensions disagree");
  }
  Tape::Node n;
  n.op = Tape::Op::kSparsePremul;
  n.a = x.id();
  n.value = (*lhs) * t.value(x);
  n.sparse = std::move(lhs);
  n.requires_grad = t.node(x).requires_grad;
  return t.emit(std::move(n));
}

Var row_slice(Var x, int offset, int count) {
  Tape& t = x.tape();
  require(offset >= 0 && count >= 0 && offset + count <= t.value(x).rows(),
          "row_slice: range out of bounds");
  Tape::Node n;
  n.op = Tape::Op::kRowSlice;
  n.a = x.id();
  n.c = static_cast<double>(offset);
  n.value = t.value(x).middleRows(offset, count);
  n.requires_grad = t.node(x).requires_grad;
  return t.emit(std::move(n));
}

Var sigmoid(Var x) {
  Tape& t = x.tape();
  Tape::Node n;
  n.op = Tape::Op::kSigmoid;
  n.a = x.id();
  n.value = t.value(x).unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  n.requires_grad = t.node(x).requires_grad;
  return t.emit(std::move(n));
}

Var log_clamped(Var x) {
  Tape& t = x.tape();
  Tape::Node n;
  n.op = Tape::Op::kLogClamp;
  n.a = x.id();
  n.value = t.value(x).unaryExpr([](double v) { return std::log(std::max(v, kLogFloor)); });
  n.requires_grad = t.node(x).requires_grad;
  return t.emit(std::move(n));
}

Var relu(Var x) {
  Tape& t = x.tape();
  Tape::Node n;
  n.op = Tape::Op::kRelu;
  n.a = x.id();
  n.value = t.value(x).cwiseMax(0.0);
  n.requires_grad = t.node(x).requires_grad;
  return t.emit(std::move(n));
}

Var abs(Var x) {
  Tape& t = x.tape();
  Tape::Node n;
  n.op = Tape::Op::kAbs;
  n.a = x.id();
  n.value = t.value(x).cwiseAbs();
  n.requires_grad = t.node(x).requires_grad;
  return t.emit(std::move(n));
}

Var cwise_max(Var x, double c) {
  Tape& t = x.tape();
  Tape::Node n;
  n.op = Tape::Op::kCwiseMaxConst;
  n.a = x.id();
  n.c = c;
  n.value = t.value(x).cwiseMax(c);
  n.requires_grad = t.node(x).requires_grad;
  return t.emit(std::move(n));
}

Var row_sum(Var x) {
  Tape& t = x.tape();
  Tape::Node n;
  n.op = Tape::Op::kRowSum;
  n.a = x.id();
  n.value = t.value(x).rowwise().sum();
  n.requires_grad = t.node(x).requires_grad;
  return t.emit(std::move(n));
}

Var row_mean(Var x) {
  Tape& t = x.tape();
  Tape::Node n;
  n.op = Tape::Op::kRowMean;
  n.a = x.id();
  n.value = t.value(x).rowwise().mean();
  n.requires_grad = t.node(x).requires_grad;
  return t.emit(std::move(n));
}

Var sum_all(Var x) {
  Tape& t = x.tape();
  Tape::Node n;
  n.op = Tape::Op::kSumAll;
  n.a = x.id();
  n.value = Matrix::Constant(1, 1, t.value(x).sum());
  n.requires_grad = t.node(x).requires_grad;
  return t.emit(std::move(n));
}

Var mean_all(Var x) {
  Tape& t = x.tape();
  Tape::Node n;
  n.op = Tape::Op::kMeanAll;
  n.a = x.id();
  n.value = Matrix::Constant(1, 1, t.value(x).mean());
  n.requires_grad = t.node(x).requires_grad;
  return t.emit(std::move(n));
}

Var dot(Var x, Var y) {
  Tape& t = same_tape(x, y);
  require_same_shape(t.value(x), t.value(y), "dot");
  Tape::Node n;
  n.op = Tape::Op::kDot;
  n.a = x.id();
  n.b = y.id();
  n.value = Matrix::Constant(1, 1, t.value(x).cwiseProduct(t.value(y)).sum());
  n.requires_grad = t.node(x).requires_grad || t.node(y).requires_grad;
  return t.emit(std::move(n));
}

Var squared_norm(Var x) {
  Tape& t = x.tape();
  Tape::Node n;
  n.op = Tape::Op::kSquaredNorm;
  n.a = x.id();
  n.value = Matrix::Constant(1, 1, t.value(x).squaredNorm());
  n.requires_grad = t.node(x).requires_grad;
  return t.emit(std::move(n));
}

}  // namespace cdgad::diff
