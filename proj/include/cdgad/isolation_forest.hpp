#pragma once

#include <cstdint>
#include <vector>

#include "cdgad/types.hpp"

namespace cdgad {

struct ForestConfig {
  int n_trees = 100;
  int subsample = 256;  // capped at the data size
  std::uint64_t seed = 0;
};

// Isolation forest over row vectors. Fitting is unsupervised; scores lie in
// (0, 1) with higher = more anomalous.
class IsolationForest {
 public:
  static IsolationForest fit(const Matrix& x, const ForestConfig& cfg);

  // s(x) = 2^(-E[h(x)] / c(subsample)), path length adjusted by c(leaf size)
  // at non-singleton leaves.
  Vector score(const Matrix& x) const;

  double average_path_length(const Eigen::Ref<const Vector>& row) const;
  int tree_count() const { return static_cast<int>(trees_.size()); }
  int sample_size() const { return sample_size_; }

  // Expected path-length normaliser: c(n) = 2 H(n-1) - 2 (n-1)/n with
  // H(i) ~ ln(i) + Euler-Mascheroni, zero for n <= 1.
  static double path_length_normalizer(long n);
  // Score of a point whose average path length over the forest is `h`.
  static double score_from_path_length(double h, long n);

 private:
  struct TreeNode {
    int feature = -1;       // -1 marks a leaf
    double split = 0.0;
    int left = -1;
    int right = -1;
    int size = 0;           // rows reaching a leaf
  };
  struct Tree {
    std::vector<TreeNode> nodes;
  };

  std::vector<Tree> trees_;
  int sample_size_ = 0;
  Eigen::Index dim_ = 0;
};

}  // namespace cdgad
