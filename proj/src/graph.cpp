#include "cdgad/graph.hpp"

#include <algorithm>
#include <numeric>

#include "cdgad/rng.hpp"

namespace cdgad {

const char* to_string(Domain d) { return d == Domain::kSource ? "source" : "target"; }

AttributedGraph::AttributedGraph(std::vector<std::vector<NodeId>> adjacency,
                                 Matrix features, std::optional<std::vector<int>> labels,
                                 Domain domain)
    : adjacency_(std::move(adjacency)),
      features_(std::move(features)),
      labels_(std::move(labels)),
      domain_(domain) {
  const auto n = static_cast<NodeId>(adjacency_.size());
  if (features_.rows() != n) {
    throw StructuralError("graph: feature rows (" + std::to_string(features_.rows()) +
                          ") != node count (" + std::to_string(n) + ")");
  }
  if (!features_.allFinite()) throw StructuralError("graph: non-finite feature value");
  if (labels_) {
    if (static_cast<NodeId>(labels_->size()) != n) {
      throw StructuralError("graph: label count != node count");
    }
    for (int y : *labels_) {
      if (y != 0 && y != 1) throw StructuralError("graph: labels must be 0 or 1");
    }
  }
  // normalise: sort, dedup, drop self loops, enforce symmetry
  for (NodeId u = 0; u < n; ++u) {
    auto& nbrs = adjacency_[u];
    for (NodeId v : nbrs) {
      if (v < 0 || v >= n) {
        throw StructuralError("graph: neighbor id " + std::to_string(v) + " out of range");
      }
    }
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    nbrs.erase(std::remove(nbrs.begin(), nbrs.end(), u), nbrs.end());
  }
  std::vector<std::vector<NodeId>> missing(n);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v : adjacency_[u]) {
      if (!std::binary_search(adjacency_[v].begin(), adjacency_[v].end(), u)) {
        missing[v].push_back(u);
      }
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    if (missing[v].empty()) continue;
    auto& nbrs = adjacency_[v];
    nbrs.insert(nbrs.end(), missing[v].begin(), missing[v].end());
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
}

bool AttributedGraph::has_edge(NodeId u, NodeId v) const {
  const auto& nbrs = adjacency_[u];
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

std::size_t AttributedGraph::edge_count() const {
  std::size_t half = 0;
  for (const auto& nbrs : adjacency_) half += nbrs.size();
  return half / 2;
}

bool AttributedGraph::has_isolated_nodes() const {
  return std::any_of(adjacency_.begin(), adjacency_.end(),
                     [](const auto& nbrs) { return nbrs.empty(); });
}

const std::vector<int>& AttributedGraph::training_labels() const {
  if (domain_ == Domain::kTarget) {
    throw StructuralError("target-domain labels are evaluation-only");
  }
  if (!labels_) throw StructuralError("graph has no labels");
  return *labels_;
}

const std::vector<int>& AttributedGraph::evaluation_labels() const {
  if (!labels_) throw StructuralError("graph has no labels");
  return *labels_;
}

AttributedGraph cap_degree(const AttributedGraph& g, int max_degree, std::uint64_t seed) {
  if (max_degree < 1) throw ConfigError("cap_degree: max_degree must be >= 1");
  const NodeId n = g.node_count();
  std::vector<std::vector<NodeId>> adj(n);
  for (NodeId u = 0; u < n; ++u) adj[u] = g.neighbors(u);

  Rng rng(derive_seed(seed, "cap_degree"));
  auto remove_edge = [&adj](NodeId a, NodeId b) {
    auto& na = adj[a];
    na.erase(std::find(na.begin(), na.end(), b));
    auto& nb = adj[b];
    nb.erase(std::find(nb.begin(), nb.end(), a));
  };
  for (NodeId u = 0; u < n; ++u) {
    while (static_cast<int>(adj[u].size()) > max_degree) {
      const auto pick = rng.uniform_index(adj[u].size());
      remove_edge(u, adj[u][pick]);
    }
  }

  // drop isolated nodes and re-index everything
  std::vector<NodeId> remap(n, -1);
  NodeId kept = 0;
  for (NodeId u = 0; u < n; ++u) {
    if (!adj[u].empty()) remap[u] = kept++;
  }
  std::vector<std::vector<NodeId>> adj2(kept);
  Matrix feats(kept, g.feature_dim());
  std::optional<std::vector<int>> labels;
  if (g.has_labels()) labels.emplace(kept, 0);
  const std::vector<int>* old_labels =
      g.has_labels() ? &g.evaluation_labels() : nullptr;
  for (NodeId u = 0; u < n; ++u) {
    if (remap[u] < 0) continue;
    auto& nbrs = adj2[remap[u]];
    nbrs.reserve(adj[u].size());
    for (NodeId v : adj[u]) nbrs.push_back(remap[v]);
    feats.row(remap[u]) = g.features().row(u);
    if (labels) (*labels)[remap[u]] = (*old_labels)[u];
  }
  return AttributedGraph(std::move(adj2), std::move(feats), std::move(labels), g.domain());
}

}  // namespace cdgad
