#include "cdgad/isolation_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cdgad/rng.hpp"

namespace cdgad {

namespace {

constexpr double kEulerMascheroni = 0.5772156649;

}  // namespace

double IsolationForest::path_length_normalizer(long n) {
  if (n <= 1) return 0.0;
  const double m = static_cast<double>(n - 1);
  const double harmonic = std::log(m) + kEulerMascheroni;
  return 2.0 * harmonic - 2.0 * m / static_cast<double>(n);
}

double IsolationForest::score_from_path_length(double h, long n) {
  return std::pow(2.0, -h / path_length_normalizer(n));
}

IsolationForest IsolationForest::fit(const Matrix& x, const ForestConfig& cfg) {
  if (cfg.n_trees < 1) throw ConfigError("iforest: n_trees must be >= 1");
  if (cfg.subsample < 2) throw ConfigError("iforest: subsample must be >= 2");
  if (x.rows() < 2) throw StructuralError("iforest: need at least 2 rows");

  IsolationForest forest;
  forest.dim_ = x.cols();
  forest.sample_size_ = static_cast<int>(std::min<Eigen::Index>(cfg.subsample, x.rows()));
  const int height_limit =
      static_cast<int>(std::ceil(std::log2(static_cast<double>(forest.sample_size_))));

  std::vector<int> all_rows(x.rows());
  std::iota(all_rows.begin(), all_rows.end(), 0);

  forest.trees_.resize(cfg.n_trees);
  for (int t = 0; t < cfg.n_trees; ++t) {
    // per-tree stream keyed by tree index: trees are order-independent
    Rng rng(derive_seed(cfg.seed, "iforest/tree/" + std::to_string(t)));
    std::vector<int> rows = all_rows;
    rng.shuffle(rows);
    rows.resize(forest.sample_size_);

    Tree& tree = forest.trees_[t];
    // recursive split; lambda keeps the per-tree state together
    auto grow = [&](auto&& self, std::vector<int>& subset, int depth) -> int {
      const int id = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back({});
      if (depth >= height_limit || subset.size() <= 1) {
        tree.nodes[id].size = static_cast<int>(subset.size());
        return id;
      }
      // candidate features must have spread inside this partition
      std::vector<int> spread_features;
      for (Eigen::Index f = 0; f < x.cols(); ++f) {
        double lo = x(subset[0], f), hi = lo;
        for (int r : subset) {
          lo = std::min(lo, x(r, f));
          hi = std::max(hi, x(r, f));
        }
        if (hi > lo) spread_features.push_back(static_cast<int>(f));
      }
      if (spread_features.empty()) {
        tree.nodes[id].size = static_cast<int>(subset.size());
        return id;
      }
      const int feature =
          spread_features[rng.uniform_index(spread_features.size())];
      double lo = x(subset[0], feature), hi = lo;
      for (int r : subset) {
        lo = std::min(lo, x(r, feature));
        hi = std::max(hi, x(r, feature));
      }
      // strictly interior split so both children are nonempty
      double split = lo + (hi - lo) * rng.uniform();
      int retries = 0;
      while ((split <= lo || split >= hi) && retries++ < 64) {
        split = lo + (hi - lo) * rng.uniform();
      }
      if (split <= lo || split >= hi) {
        // interval too narrow to represent an interior point
        tree.nodes[id].size = static_cast<int>(subset.size());
        return id;
      }

      std::vector<int> left_rows, right_rows;
      for (int r : subset) {
        (x(r, feature) < split ? left_rows : right_rows).push_back(r);
      }
      subset.clear();
      subset.shrink_to_fit();
      const int left = self(self, left_rows, depth + 1);
      const int right = self(self, right_rows, depth + 1);
      tree.nodes[id].feature = feature;
      tree.nodes[id].split = split;
      tree.nodes[id].left = left;
      tree.nodes[id].right = right;
      return id;
    };
    grow(grow, rows, 0);
  }
  return forest;
}

double IsolationForest::average_path_length(const Eigen::Ref<const Vector>& row) const {
  double total = 0.0;
  for (const Tree& tree : trees_) {
    int id = 0;
    int depth = 0;
    while (tree.nodes[id].feature >= 0) {
      id = row(tree.nodes[id].feature) < tree.nodes[id].split ? tree.nodes[id].left
                                                              : tree.nodes[id].right;
      ++depth;
    }
    total += depth + path_length_normalizer(tree.nodes[id].size);
  }
  return total / static_cast<double>(trees_.size());
}

Vector IsolationForest::score(const Matrix& x) const {
  if (trees_.empty()) throw StructuralError("iforest: not fitted");
  if (x.cols() != dim_) {
    throw StructuralError("iforest: feature dim " + std::to_string(x.cols()) +
                          " != fitted dim " + std::to_string(dim_));
  }
  Vector scores(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    scores(i) = score_from_path_length(average_path_length(x.row(i).transpose()),
                                       sample_size_);
  }
  return scores;
}

}  // namespace cdgad
