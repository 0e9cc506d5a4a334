#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cdgad/types.hpp"

namespace cdgad {

enum class Domain { kSource, kTarget };

const char* to_string(Domain d);

// Undirected attributed graph: symmetric neighbor lists, an n x d feature
// matrix, and optional binary node labels (1 = anomaly). Immutable after
// construction and safe to share across threads.
//
// Target-domain labels exist only for evaluation; training code must go
// through training_labels(), which refuses to expose them.
class AttributedGraph {
 public:
  // Validates and normalises: neighbor lists are deduplicated, symmetrized
  // and sorted; self loops are rejected.
  AttributedGraph(std::vector<std::vector<NodeId>> adjacency, Matrix features,
                  std::optional<std::vector<int>> labels, Domain domain);

  NodeId node_count() const { return static_cast<NodeId>(adjacency_.size()); }
  Eigen::Index feature_dim() const { return features_.cols(); }
  Domain domain() const { return domain_; }

  const std::vector<NodeId>& neighbors(NodeId v) const { return adjacency_[v]; }
  int degree(NodeId v) const { return static_cast<int>(adjacency_[v].size()); }
  bool has_edge(NodeId u, NodeId v) const;
  std::size_t edge_count() const;  // undirected edges
  bool has_isolated_nodes() const;

  const Matrix& features() const { return features_; }

  bool has_labels() const { return labels_.has_value(); }
  // Labels for supervised training. Throws for target-domain graphs: the
  // target is unlabelled during training by problem definition.
  const std::vector<int>& training_labels() const;
  // Held-out labels for metric computation only.
  const std::vector<int>& evaluation_labels() const;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  Matrix features_;
  std::optional<std::vector<int>> labels_;
  Domain domain_;
};

// Uniformly removes incident edges of every node whose degree exceeds
// `max_degree`, then drops nodes left isolated (features and labels are
// re-indexed). Deterministic in `seed`.
AttributedGraph cap_degree(const AttributedGraph& g, int max_degree, std::uint64_t seed);

}  // namespace cdgad
