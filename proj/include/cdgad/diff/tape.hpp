#pragma once

#include <memory>
#include <vector>

#include "cdgad/types.hpp"

namespace cdgad::diff {

// Arguments of log() are clamped to this floor before evaluation; the
// gradient is zero in the clamped region.
inline constexpr double kLogFloor = 1e-12;

class Tape;

// Lightweight handle to a node on a Tape. Valid only as long as the tape
// that produced it is alive.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Matrix& value() const;

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Eagerly-evaluated reverse-mode tape over dense matrices. Values are
// computed when nodes are built; backward() walks the tape in reverse and
// accumulates gradients into every parameter leaf. Evaluation is
// deterministic: the same sequence of operations on the same inputs yields
// bit-identical values and gradients.
//
// A Tape is single-threaded. Distinct tapes may live on distinct threads.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf that participates in gradients.
  Var parameter(Matrix value);
  // Leaf without gradient.
  Var constant(Matrix value);
  Var constant_scalar(double value);

  const Matrix& value(Var v) const;
  // Value of a 1x1 node.
  double scalar_value(Var v) const;

  // Reverse pass from a scalar output (seed 1).
  void backward(Var output);
  // Reverse pass from an arbitrary node with an explicit output gradient.
  void backward(Var output, const Matrix& seed);

  // Gradient accumulated at `v` by the last backward(); zero matrix if the
  // node was not reached.
  Matrix gradient(Var v) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op {
    kParameter,
    kConstant,
    kAdd,
    kSub,
    kNeg,
    kScale,        // c * x
    kAddScalar,    // x + broadcast(1x1 var)
    kHadamard,
    kMatMul,
    kSparsePremul,  // const sparse * x
    kRowSlice,      // rows [offset, offset+count)
    kSigmoid,
    kLogClamp,
    kRelu,
    kAbs,
    kCwiseMaxConst,  // max(x, c) elementwise
    kRowSum,         // n x m -> n x 1
    kRowMean,        // n x m -> n x 1
    kSumAll,         // -> 1 x 1
    kMeanAll,        // -> 1 x 1
    kDot,            // Frobenius inner product -> 1 x 1
    kSquaredNorm,    // -> 1 x 1
  };

  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    double c = 0.0;
    std::shared_ptr<const SparseMatrix> sparse;
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
  };

  friend Var operator+(Var x, Var y);
  friend Var operator-(Var x, Var y);
  friend Var operator-(Var x);
  friend Var operator*(double c, Var x);
  friend Var add_scalar(Var x, Var s);
  friend Var hadamard(Var x, Var y);
  friend Var matmul(Var x, Var y);
  friend Var sparse_premul(std::shared_ptr<const SparseMatrix> lhs, Var x);
  friend Var row_slice(Var x, int offset, int count);
  friend Var sigmoid(Var x);
  friend Var log_clamped(Var x);
  friend Var relu(Var x);
  friend Var abs(Var x);
  friend Var cwise_max(Var x, double c);
  friend Var row_sum(Var x);
  friend Var row_mean(Var x);
  friend Var sum_all(Var x);
  friend Var mean_all(Var x);
  friend Var dot(Var x, Var y);
  friend Var squared_norm(Var x);

  Var emit(Node node);
  const Node& node(Var v) const;
  void accumulate(int id, const Matrix& g);

  std::vector<Node> nodes_;
};

// Expression-building free functions. Binary ops require both operands to
// come from the same tape.
Var operator+(Var x, Var y);
Var operator-(Var x, Var y);
Var operator-(Var x);
Var operator*(double c, Var x);
inline Var operator*(Var x, double c) { return c * x; }
Var add_scalar(Var x, Var s);
Var hadamard(Var x, Var y);
Var matmul(Var x, Var y);
Var sparse_premul(std::shared_ptr<const SparseMatrix> lhs, Var x);
Var row_slice(Var x, int offset, int count);
Var sigmoid(Var x);
Var log_clamped(Var x);
Var relu(Var x);
Var abs(Var x);
Var cwise_max(Var x, double c);
Var row_sum(Var x);
Var row_mean(Var x);
Var sum_all(Var x);
Var mean_all(Var x);
Var dot(Var x, Var y);
Var squared_norm(Var x);

inline const Matrix& Var::value() const { return tape_->value(*this); }

}  // namespace cdgad::diff
