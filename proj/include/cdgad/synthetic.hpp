#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cdgad/graph.hpp"

namespace cdgad {

// Configuration of the seeded cross-domain benchmark pair. Both domains
// share community centroids (they are "related"); the target's features are
// produced in the source feature space and pushed through a domain shift
// (rotation + per-feature affine rescale + random projection when the
// dimensionalities differ).
struct SyntheticPairConfig {
  int source_nodes = 620;
  int target_nodes = 540;
  int source_dim = 16;
  int target_dim = 12;
  int communities = 4;
  double intra_edge_prob = 0.015;
  double inter_edge_prob = 0.002;
  double source_anomaly_ratio = 0.05;
  double target_anomaly_ratio = 0.05;
  int structural_extra_edges = 6;
  double attribute_shift_magnitude = 25.0;  // in feature-noise std units
  double domain_shift_strength = 0.6;
  std::uint64_t seed = 1;

  void validate() const;
};

enum class PlantKind : std::uint8_t { kNormal = 0, kStructural = 1, kAttribute = 2 };

struct SyntheticPair {
  AttributedGraph source;
  AttributedGraph target;  // labels attached, evaluation-only by domain tag
  // how each node was planted; not part of the emitted dataset files
  std::vector<PlantKind> source_plants;
  std::vector<PlantKind> target_plants;
};

// Generates the pair. Pure function of the config: identical configs yield
// byte-identical graphs.
SyntheticPair generate_cd_pair(const SyntheticPairConfig& cfg);

// Emits <out>/source and <out>/target dataset directories plus a manifest
// echoing the config and seed.
void write_cd_pair(const std::filesystem::path& out, const SyntheticPairConfig& cfg);

std::string synthetic_config_to_json(const SyntheticPairConfig& cfg);
SyntheticPairConfig synthetic_config_from_json(const std::string& text);

}  // namespace cdgad
