#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cdgad/graph.hpp"
#include "cdgad/rng.hpp"

namespace cdgad {

struct SamplerConfig {
  int batch_size = 128;
  int negatives_per_centre = 5;   // Q
  std::vector<int> fanouts = {25, 10};
  bool degree_weighted_negatives = false;
  // off: batches carry centres only (plain supervised minibatches)
  bool sample_pairs = true;
  std::uint64_t seed = 0;

  void validate() const;
};

// Layered neighborhood expansion for minibatch message passing.
// frontiers[0] holds the (deduplicated) requested nodes; frontiers[h]
// additionally contains everything needed h hops out. samples[h][i] are the
// sampled neighbors of frontiers[h][i] used by the hop-(h+1) expansion.
struct FanoutSample {
  std::vector<std::vector<NodeId>> frontiers;
  std::vector<std::vector<std::vector<NodeId>>> samples;
  // position of each requested node (including duplicates) in frontiers[0]
  std::vector<int> request_positions;
};

// For each requested node and hop, min(fanout, degree) distinct neighbors
// sampled uniformly without replacement. A fanout list one shorter than
// `depth` leaves the first hop exact (all neighbors kept).
FanoutSample sample_fanout(const AttributedGraph& g, const std::vector<NodeId>& nodes,
                           const std::vector<int>& fanouts, int depth, Rng& rng);

// One optimisation batch: centres with one first-order positive each and Q
// non-neighbor negatives each (row-major, Q per centre), plus the fanout
// covering every node the encoder will touch.
struct NodeBatch {
  std::vector<NodeId> centres;
  std::vector<NodeId> positives;
  std::vector<NodeId> negatives;
  FanoutSample fanout;

  std::vector<NodeId> concatenated() const;
  int negatives_per_centre() const {
    return centres.empty() ? 0 : static_cast<int>(negatives.size() / centres.size());
  }
};

// Draws centres without replacement from a per-epoch permutation; the final
// batch of an epoch may be short. One sampler owns one RNG stream; use one
// sampler per thread.
class BatchSampler {
 public:
  // `pool` restricts the centre permutation (defaults to every node).
  BatchSampler(const AttributedGraph& g, SamplerConfig cfg, int encoder_depth,
               std::vector<NodeId> pool = {});

  // Starts a new epoch: reshuffles the permutation and resets the cursor.
  void start_epoch();
  // Next batch, or nullopt once the epoch is exhausted.
  std::optional<NodeBatch> next_batch();

  int batches_per_epoch() const;

 private:
  NodeId sample_positive(NodeId centre);
  NodeId sample_negative(NodeId centre);

  const AttributedGraph& graph_;
  SamplerConfig cfg_;
  int encoder_depth_;
  std::vector<NodeId> pool_;
  std::vector<NodeId> permutation_;
  std::size_t cursor_ = 0;
  Rng rng_;
};

}  // namespace cdgad
