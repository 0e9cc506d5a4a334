#include "cdgad/sampler.hpp"

#include <algorithm>
#include <numeric>

namespace cdgad {

void SamplerConfig::validate() const {
  if (batch_size < 1) throw ConfigError("sampler: batch_size must be >= 1");
  if (negatives_per_centre < 1) throw ConfigError("sampler: Q must be >= 1");
  if (fanouts.empty()) throw ConfigError("sampler: fanouts must be nonempty");
  for (int f : fanouts) {
    if (f < 1) throw ConfigError("sampler: fanouts must be >= 1");
  }
}

FanoutSample sample_fanout(const AttributedGraph& g, const std::vector<NodeId>& nodes,
                           const std::vector<int>& fanouts, int depth, Rng& rng) {
  if (static_cast<int>(fanouts.size()) != depth &&
      static_cast<int>(fanouts.size()) != depth - 1) {
    throw ConfigError("sample_fanout: need depth or depth-1 fanouts, got " +
                      std::to_string(fanouts.size()) + " for depth " +
                      std::to_string(depth));
  }
  // hops missing a fanout are exact
  std::vector<int> per_hop(depth, -1);
  const int offset = depth - static_cast<int>(fanouts.size());
  for (std::size_t i = 0; i < fanouts.size(); ++i) per_hop[offset + i] = fanouts[i];

  FanoutSample out;
  out.frontiers.resize(depth + 1);
  out.samples.resize(depth);

  std::vector<int> position(g.node_count(), -1);
  auto& base = out.frontiers[0];
  out.request_positions.reserve(nodes.size());
  for (NodeId v : nodes) {
    if (v < 0 || v >= g.node_count()) {
      throw StructuralError("sample_fanout: node id out of range");
    }
    if (position[v] < 0) {
      position[v] = static_cast<int>(base.size());
      base.push_back(v);
    }
    out.request_positions.push_back(position[v]);
  }

  std::vector<NodeId> scratch;
  for (int h = 0; h < depth; ++h) {
    const auto& frontier = out.frontiers[h];
    auto& next = out.frontiers[h + 1];
    auto& samples = out.samples[h];
    samples.resize(frontier.size());
    // the next frontier starts as a copy: self representations feed the mean
    std::fill(position.begin(), position.end(), -1);
    next = frontier;
    for (std::size_t i = 0; i < next.size(); ++i) position[next[i]] = static_cast<int>(i);

    for (std::size_t i = 0; i < frontier.size(); ++i) {
      const NodeId v = frontier[i];
      const auto& nbrs = g.neighbors(v);
      const int fanout = per_hop[h];
      if (fanout < 0 || static_cast<int>(nbrs.size()) <= fanout) {
        samples[i] = nbrs;
      } else {
        // partial Fisher-Yates: first `fanout` entries of a shuffle
        scratch = nbrs;
        for (int k = 0; k < fanout; ++k) {
          const auto j = k + rng.uniform_index(scratch.size() - k);
          std::swap(scratch[k], scratch[j]);
        }
        scratch.resize(fanout);
        samples[i] = scratch;
      }
      for (NodeId u : samples[i]) {
        if (position[u] < 0) {
          position[u] = static_cast<int>(next.size());
          next.push_back(u);
        }
      }
    }
  }
  return out;
}

std::vector<NodeId> NodeBatch::concatenated() const {
  std::vector<NodeId> all;
  all.reserve(centres.size() + positives.size() + negatives.size());
  all.insert(all.end(), centres.begin(), centres.end());
  all.insert(all.end(), positives.begin(), positives.end());
  all.insert(all.end(), negatives.begin(), negatives.end());
  return all;
}

BatchSampler::BatchSampler(const AttributedGraph& g, SamplerConfig cfg, int encoder_depth,
                           std::vector<NodeId> pool)
    : graph_(g),
      cfg_(std::move(cfg)),
      encoder_depth_(encoder_depth),
      pool_(std::move(pool)),
      rng_(derive_seed(cfg_.seed, "batch_sampler")) {
  cfg_.validate();
  if (g.has_isolated_nodes()) {
    throw StructuralError("sampler: graph has isolated nodes; cap_degree drops them");
  }
  if (pool_.empty()) {
    pool_.resize(g.node_count());
    std::iota(pool_.begin(), pool_.end(), 0);
  }
  permutation_ = pool_;
  start_epoch();
}

void BatchSampler::start_epoch() {
  rng_.shuffle(permutation_);
  cursor_ = 0;
}

int BatchSampler::batches_per_epoch() const {
  return static_cast<int>((pool_.size() + cfg_.batch_size - 1) / cfg_.batch_size);
}

NodeId BatchSampler::sample_positive(NodeId centre) {
  const auto& nbrs = graph_.neighbors(centre);
  return nbrs[rng_.uniform_index(nbrs.size())];
}

NodeId BatchSampler::sample_negative(NodeId centre) {
  const auto& nbrs = graph_.neighbors(centre);
  const NodeId n = graph_.node_count();
  const long complement = static_cast<long>(n) - 1 - static_cast<long>(nbrs.size());
  if (complement <= 0) {
    throw DegenerateSelectionError(
        "sampler: node " + std::to_string(centre) +
        " is adjacent to every other node; no negative exists");
  }
  if (!cfg_.degree_weighted_negatives) {
    // exact draw: index into the sorted complement of the closed neighborhood
    const long k =
        static_cast<long>(rng_.uniform_index(static_cast<std::uint64_t>(complement)));
    std::vector<NodeId> blocked(nbrs);
    blocked.insert(std::lower_bound(blocked.begin(), blocked.end(), centre), centre);
    NodeId candidate = static_cast<NodeId>(k);
    for (NodeId b : blocked) {
      if (b <= candidate) {
        ++candidate;
      } else {
        break;
      }
    }
    return candidate;
  }
  // degree-proportional variant (off by default)
  double total = 0.0;
  for (NodeId v = 0; v < n; ++v) {
    if (v == centre || graph_.has_edge(centre, v)) continue;
    total += graph_.degree(v);
  }
  double point = rng_.uniform() * total;
  for (NodeId v = 0; v < n; ++v) {
    if (v == centre || graph_.has_edge(centre, v)) continue;
    point -= graph_.degree(v);
    if (point <= 0.0) return v;
  }
  // floating-point tail
  for (NodeId v = n - 1; v >= 0; --v) {
    if (v != centre && !graph_.has_edge(centre, v)) return v;
  }
  throw DegenerateSelectionError("sampler: no negative candidate");
}

std::optional<NodeBatch> BatchSampler::next_batch() {
  if (cursor_ >= permutation_.size()) return std::nullopt;
  NodeBatch batch;
  const std::size_t take =
      std::min<std::size_t>(cfg_.batch_size, permutation_.size() - cursor_);
  batch.centres.assign(permutation_.begin() + cursor_,
                       permutation_.begin() + cursor_ + take);
  cursor_ += take;

  if (cfg_.sample_pairs) {
    batch.positives.reserve(take);
    batch.negatives.reserve(take * cfg_.negatives_per_centre);
    for (NodeId u : batch.centres) {
      batch.positives.push_back(sample_positive(u));
      for (int q = 0; q < cfg_.negatives_per_centre; ++q) {
        batch.negatives.push_back(sample_negative(u));
      }
    }
  }
  batch.fanout =
      sample_fanout(graph_, batch.concatenated(), cfg_.fanouts, encoder_depth_, rng_);
  return batch;
}

}  // namespace cdgad
