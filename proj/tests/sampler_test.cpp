#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "cdgad/sampler.hpp"
#include "cdgad/synthetic.hpp"

using namespace cdgad;

namespace {

AttributedGraph make_graph(int n, std::vector<std::pair<NodeId, NodeId>> edges) {
  std::vector<std::vector<NodeId>> adj(n);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  return AttributedGraph(std::move(adj), Matrix::Zero(n, 2), std::nullopt, Domain::kSource);
}

bool batches_equal(const NodeBatch& a, const NodeBatch& b) {
  return a.centres == b.centres && a.positives == b.positives &&
         a.negatives == b.negatives && a.fanout.frontiers == b.fanout.frontiers &&
         a.fanout.samples == b.fanout.samples;
}

}  // namespace

TEST_CASE("triangle graph has no negatives and fails loudly") {
  AttributedGraph g = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  SamplerConfig cfg;
  cfg.batch_size = 3;
  cfg.negatives_per_centre = 1;
  cfg.fanouts = {2};
  BatchSampler sampler(g, cfg, 1);
  CHECK_THROWS_AS(sampler.next_batch(), DegenerateSelectionError);
}

TEST_CASE("path graph forces the positive and the negative") {
  AttributedGraph g = make_graph(3, {{0, 1}, {1, 2}});
  SamplerConfig cfg;
  cfg.batch_size = 2;
  cfg.negatives_per_centre = 1;
  cfg.fanouts = {2};
  cfg.seed = 5;
  // the middle node is adjacent to everything, so centres come from the ends
  BatchSampler sampler(g, cfg, 1, {0, 2});
  NodeBatch batch = *sampler.next_batch();
  REQUIRE(batch.centres.size() == 2);
  for (std::size_t i = 0; i < batch.centres.size(); ++i) {
    if (batch.centres[i] == 0) {
      CHECK(batch.positives[i] == 1);
      CHECK(batch.negatives[i] == 2);
    } else {
      CHECK(batch.centres[i] == 2);
      CHECK(batch.positives[i] == 1);
      CHECK(batch.negatives[i] == 0);
    }
  }
}

TEST_CASE("batch invariants hold on a synthetic graph") {
  SyntheticPairConfig gen;
  gen.seed = 17;
  SyntheticPair pair = generate_cd_pair(gen);
  const AttributedGraph& g = pair.source;
  SamplerConfig cfg;
  cfg.batch_size = 64;
  cfg.negatives_per_centre = 5;
  cfg.fanouts = {25, 10};
  cfg.seed = 23;
  BatchSampler sampler(g, cfg, 3);
  int batches = 0;
  while (auto batch = sampler.next_batch()) {
    ++batches;
    REQUIRE(batch->positives.size() == batch->centres.size());
    REQUIRE(batch->negatives.size() == batch->centres.size() * 5);
    for (std::size_t i = 0; i < batch->centres.size(); ++i) {
      const NodeId u = batch->centres[i];
      CHECK(g.has_edge(u, batch->positives[i]));
      for (int q = 0; q < 5; ++q) {
        const NodeId vn = batch->negatives[i * 5 + q];
        CHECK(vn != u);
        CHECK_FALSE(g.has_edge(u, vn));
      }
    }
  }
  CHECK(batches == sampler.batches_per_epoch());
}

TEST_CASE("each node is a centre exactly once per epoch") {
  SyntheticPairConfig gen;
  gen.source_nodes = 200;
  gen.seed = 8;
  SyntheticPair pair = generate_cd_pair(gen);
  SamplerConfig cfg;
  cfg.batch_size = 32;
  cfg.fanouts = {5};
  cfg.seed = 2;
  BatchSampler sampler(pair.source, cfg, 1);
  for (int epoch = 0; epoch < 2; ++epoch) {
    std::vector<int> seen(pair.source.node_count(), 0);
    while (auto batch = sampler.next_batch()) {
      for (NodeId u : batch->centres) seen[u] += 1;
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    sampler.start_epoch();
  }
}

TEST_CASE("sampling is deterministic for a fixed seed") {
  SyntheticPairConfig gen;
  gen.source_nodes = 1000;
  gen.seed = 3;
  SyntheticPair pair = generate_cd_pair(gen);
  SamplerConfig cfg;
  cfg.batch_size = 128;
  cfg.fanouts = {25, 10};
  cfg.seed = 99;
  BatchSampler a(pair.source, cfg, 3);
  BatchSampler b(pair.source, cfg, 3);
  while (true) {
    auto ba = a.next_batch();
    auto bb = b.next_batch();
    REQUIRE(ba.has_value() == bb.has_value());
    if (!ba) break;
    CHECK(batches_equal(*ba, *bb));
  }
}

TEST_CASE("positive sampling is uniform over neighbors") {
  // star centre 0 with 4 leaves plus a ring so every node has degree >= 2
  AttributedGraph g = make_graph(
      8, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {5, 6}, {6, 7}, {5, 7}, {1, 2}, {3, 4}});
  SamplerConfig cfg;
  cfg.batch_size = 8;
  cfg.negatives_per_centre = 1;
  cfg.fanouts = {4};
  cfg.seed = 13;
  BatchSampler sampler(g, cfg, 1);
  std::map<NodeId, int> counts;
  const int draws = 10000;
  int centre0_draws = 0;
  for (int rep = 0; rep < draws / 8 * 2; ++rep) {
    while (auto batch = sampler.next_batch()) {
      for (std::size_t i = 0; i < batch->centres.size(); ++i) {
        if (batch->centres[i] == 0) {
          counts[batch->positives[i]] += 1;
          ++centre0_draws;
        }
      }
    }
    sampler.start_epoch();
  }
  // binomial(n, 1/4): empirical frequency within 3 sigma of the expectation
  const double p = 0.25;
  const double sigma = std::sqrt(centre0_draws * p * (1 - p));
  for (NodeId leaf : {1, 2, 3, 4}) {
    CHECK(std::abs(counts[leaf] - centre0_draws * p) <= 3.0 * sigma);
  }
}

TEST_CASE("fanout: degree below the budget keeps all neighbors") {
  AttributedGraph g = make_graph(5, {{0, 1}, {0, 2}, {0, 3}, {1, 4}, {2, 4}, {3, 4}});
  Rng rng(1);
  FanoutSample fan = sample_fanout(g, {0}, {25}, 1, rng);
  CHECK(fan.samples[0][0].size() == 3);
}

TEST_CASE("fanout: exactly the budget when degree exceeds it") {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId v = 1; v <= 40; ++v) edges.push_back({0, v});
  edges.push_back({1, 2});  // keep leaves non-isolated enough for sampling
  AttributedGraph g = make_graph(41, edges);
  Rng rng(4);
  FanoutSample fan = sample_fanout(g, {0}, {25}, 1, rng);
  REQUIRE(fan.samples[0][0].size() == 25);
  std::set<NodeId> distinct(fan.samples[0][0].begin(), fan.samples[0][0].end());
  CHECK(distinct.size() == 25);
  for (NodeId u : distinct) CHECK(g.has_edge(0, u));
}

TEST_CASE("fanout: deterministic across runs for a fixed seed") {
  SyntheticPairConfig gen;
  gen.seed = 77;
  SyntheticPair pair = generate_cd_pair(gen);
  std::vector<NodeId> nodes = {0, 5, 9, 120, 3, 5};
  Rng r1(42), r2(42);
  FanoutSample a = sample_fanout(pair.source, nodes, {25, 10}, 3, r1);
  FanoutSample b = sample_fanout(pair.source, nodes, {25, 10}, 3, r2);
  CHECK(a.frontiers == b.frontiers);
  CHECK(a.samples == b.samples);
  CHECK(a.request_positions == b.request_positions);
  // duplicate requests share one frontier slot
  CHECK(a.request_positions[1] == a.request_positions[5]);
}

TEST_CASE("degree-weighted negatives prefer hubs") {
  // node 7 is a hub among the non-neighbors of the ring nodes
  std::vector<std::pair<NodeId, NodeId>> edges = {{0, 1}, {1, 2}, {2, 0}};
  for (NodeId v = 3; v <= 6; ++v) edges.push_back({7, v});
  edges.push_back({3, 4});
  edges.push_back({5, 6});
  AttributedGraph g = make_graph(8, edges);
  SamplerConfig cfg;
  cfg.batch_size = 3;
  cfg.negatives_per_centre = 4;
  cfg.fanouts = {4};
  cfg.degree_weighted_negatives = true;
  cfg.seed = 19;
  BatchSampler sampler(g, cfg, 1, {0, 1, 2});
  int hub = 0, total = 0;
  for (int rep = 0; rep < 400; ++rep) {
    while (auto batch = sampler.next_batch()) {
      for (NodeId vn : batch->negatives) {
        CHECK(vn >= 3);  // never a neighbor or the centre itself
        hub += vn == 7;
        ++total;
      }
    }
    sampler.start_epoch();
  }
  // hub degree 4 among non-neighbors with degrees {2,2,2,2,4}: expect 1/3
  const double share = static_cast<double>(hub) / total;
  CHECK(share > 0.25);
  CHECK(share < 0.42);
}

TEST_CASE("fanout list must match the encoder depth") {
  AttributedGraph g = make_graph(3, {{0, 1}, {1, 2}});
  Rng rng(1);
  CHECK_THROWS_AS(sample_fanout(g, {0}, {5, 5, 5}, 2, rng), ConfigError);
  CHECK_NOTHROW(sample_fanout(g, {0}, {5}, 2, rng));      // first hop exact
  CHECK_NOTHROW(sample_fanout(g, {0}, {5, 5}, 2, rng));
}
