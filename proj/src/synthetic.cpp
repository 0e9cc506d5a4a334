#include "cdgad/synthetic.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "cdgad/graph_io.hpp"
#include "cdgad/rng.hpp"

namespace cdgad {

namespace {

constexpr double kCentroidScale = 6.0;
constexpr double kFeatureNoiseStd = 1.0;

struct DomainPlan {
  int nodes;
  int dim;
  double anomaly_ratio;
  const char* stream;
};

int community_of(int node, int nodes, int communities) {
  // contiguous blocks; the last block absorbs the remainder
  const int base = nodes / communities;
  return std::min(node / base, communities - 1);
}

// Raw community-structured graph in the shared latent feature space.
struct RawDomain {
  std::vector<std::vector<NodeId>> adjacency;
  Matrix features;           // nodes x latent dim
  std::vector<int> labels;   // 1 = planted anomaly
  std::vector<PlantKind> plants;
};

RawDomain generate_domain(const SyntheticPairConfig& cfg, const Matrix& centroids,
                          const Vector& anomaly_direction, const DomainPlan& plan) {
  const int n = plan.nodes;
  const int d = static_cast<int>(centroids.cols());
  RawDomain out;
  out.labels.assign(n, 0);
  out.plants.assign(n, PlantKind::kNormal);

  // normal features: community centroid + isotropic noise
  Rng feat_rng(derive_seed(cfg.seed, std::string(plan.stream) + "/features"));
  out.features.resize(n, d);
  for (int i = 0; i < n; ++i) {
    const int c = community_of(i, n, cfg.communities);
    for (int j = 0; j < d; ++j) {
      out.features(i, j) = centroids(c, j) + kFeatureNoiseStd * feat_rng.normal();
    }
  }

  // homophilous edges
  Rng edge_rng(derive_seed(cfg.seed, std::string(plan.stream) + "/edges"));
  out.adjacency.assign(n, {});
  for (int i = 0; i < n; ++i) {
    const int ci = community_of(i, n, cfg.communities);
    for (int j = i + 1; j < n; ++j) {
      const bool same = ci == community_of(j, n, cfg.communities);
      const double p = same ? cfg.intra_edge_prob : cfg.inter_edge_prob;
      if (edge_rng.bernoulli(p)) {
        out.adjacency[i].push_back(j);
        out.adjacency[j].push_back(i);
      }
    }
  }

  // pick the anomaly set; alternate between structural and attribute plants
  const int n_anom = static_cast<int>(std::llround(plan.anomaly_ratio * n));
  if (n_anom < 1) throw ConfigError("generator: anomaly count rounds to zero");
  Rng anom_rng(derive_seed(cfg.seed, std::string(plan.stream) + "/anomalies"));
  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  anom_rng.shuffle(ids);
  for (int k = 0; k < n_anom; ++k) {
    const NodeId v = ids[k];
    out.labels[v] = 1;
    out.plants[v] = k % 2 == 0 ? PlantKind::kStructural : PlantKind::kAttribute;
    if (k % 2 == 0) {
      // structural: extra uniform edges into other communities
      const int cv = community_of(v, n, cfg.communities);
      int added = 0, guard = 0;
      while (added < cfg.structural_extra_edges && guard < 50 * cfg.structural_extra_edges) {
        ++guard;
        const NodeId u = static_cast<NodeId>(anom_rng.uniform_index(n));
        if (u == v || community_of(u, n, cfg.communities) == cv) continue;
        auto& nv = out.adjacency[v];
        if (std::find(nv.begin(), nv.end(), u) != nv.end()) continue;
        nv.push_back(u);
        out.adjacency[u].push_back(v);
        ++added;
      }
    } else {
      // attribute: shift along the domain-pair's shared anomaly signature
      // with per-node jitter; both domains plant the same kind of anomaly,
      // which is what makes them related
      Vector jitter(d);
      for (int j = 0; j < d; ++j) jitter(j) = anom_rng.normal();
      jitter.normalize();
      Vector dir = (0.75 * anomaly_direction + 0.25 * jitter).normalized();
      out.features.row(v) +=
          cfg.attribute_shift_magnitude * kFeatureNoiseStd * dir.transpose();
    }
  }

  // attach any isolated node to a random same-community peer so downstream
  // samplers always have a positive available
  Rng fix_rng(derive_seed(cfg.seed, std::string(plan.stream) + "/fixups"));
  for (int v = 0; v < n; ++v) {
    if (!out.adjacency[v].empty()) continue;
    const int cv = community_of(v, n, cfg.communities);
    NodeId u = v;
    while (u == v || community_of(u, n, cfg.communities) != cv) {
      u = static_cast<NodeId>(fix_rng.uniform_index(n));
    }
    out.adjacency[v].push_back(u);
    out.adjacency[u].push_back(v);
  }
  return out;
}

// Rotation + per-feature affine rescale + (when dims differ) random
// projection. Strength zero with matching dims is the exact identity.
Matrix apply_domain_shift(const Matrix& x, int target_dim, double strength, Rng& rng) {
  const int d = static_cast<int>(x.cols());
  Matrix shifted = x;
  if (strength != 0.0) {
    Matrix perturb(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) perturb(i, j) = strength * rng.normal();
    }
    Eigen::HouseholderQR<Matrix> qr(Matrix::Identity(d, d) + perturb);
    Matrix rotation = qr.householderQ();
    // fix reflector signs so the decomposition is continuous in `perturb`
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
      if (r(j, j) < 0) rotation.col(j) = -rotation.col(j);
    }
    Vector scale(d), translate(d);
    for (int j = 0; j < d; ++j) scale(j) = 1.0 + strength * rng.uniform(-0.5, 0.5);
    for (int j = 0; j < d; ++j) translate(j) = strength * rng.normal();
    shifted = (shifted * rotation) * scale.asDiagonal();
    shifted.rowwise() += translate.transpose();
  }
  if (target_dim != d) {
    Matrix proj(d, target_dim);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < target_dim; ++j) proj(i, j) = inv_sqrt_d * rng.normal();
    }
    shifted = shifted * proj;
  }
  return shifted;
}

}  // namespace

void SyntheticPairConfig::validate() const {
  if (source_nodes < 8 || target_nodes < 8) throw ConfigError("generator: too few nodes");
  if (source_dim < 2 || target_dim < 2) throw ConfigError("generator: dims must be >= 2");
  if (communities < 2) throw ConfigError("generator: need >= 2 communities");
  if (source_nodes / communities < 2 || target_nodes / communities < 2) {
    throw ConfigError("generator: communities larger than node budget");
  }
  if (intra_edge_prob < 0.0 || intra_edge_prob > 1.0 || inter_edge_prob < 0.0 ||
      inter_edge_prob > 1.0) {
    throw ConfigError("generator: edge probabilities must lie in [0, 1]");
  }
  auto ratio_ok = [](double r) { return r > 0.0 && r <= 0.2; };
  if (!ratio_ok(source_anomaly_ratio) || !ratio_ok(target_anomaly_ratio)) {
    throw ConfigError("generator: anomaly ratio must lie in (0, 0.2]");
  }
  if (structural_extra_edges < 1) throw ConfigError("generator: extra edges must be >= 1");
  if (attribute_shift_magnitude < 0.0) throw ConfigError("generator: negative shift");
  if (domain_shift_strength < 0.0) throw ConfigError("generator: negative shift strength");
}

SyntheticPair generate_cd_pair(const SyntheticPairConfig& cfg) {
  cfg.validate();

  Rng centroid_rng(derive_seed(cfg.seed, "centroids"));
  Matrix centroids(cfg.communities, cfg.source_dim);
  for (int c = 0; c < cfg.communities; ++c) {
    for (int j = 0; j < cfg.source_dim; ++j) {
      centroids(c, j) = kCentroidScale * centroid_rng.normal();
    }
  }
  Rng direction_rng(derive_seed(cfg.seed, "anomaly_direction"));
  Vector anomaly_direction(cfg.source_dim);
  for (int j = 0; j < cfg.source_dim; ++j) anomaly_direction(j) = direction_rng.normal();
  anomaly_direction.normalize();

  RawDomain src = generate_domain(
      cfg, centroids, anomaly_direction,
      {cfg.source_nodes, cfg.source_dim, cfg.source_anomaly_ratio, "src"});
  RawDomain tgt = generate_domain(
      cfg, centroids, anomaly_direction,
      {cfg.target_nodes, cfg.target_dim, cfg.target_anomaly_ratio, "tgt"});

  Rng shift_rng(derive_seed(cfg.seed, "domain_shift"));
  Matrix tgt_features =
      apply_domain_shift(tgt.features, cfg.target_dim, cfg.domain_shift_strength, shift_rng);

  return SyntheticPair{
      AttributedGraph(std::move(src.adjacency), std::move(src.features),
                      std::move(src.labels), Domain::kSource),
      AttributedGraph(std::move(tgt.adjacency), std::move(tgt_features),
                      std::move(tgt.labels), Domain::kTarget),
      std::move(src.plants), std::move(tgt.plants)};
}

std::string synthetic_config_to_json(const SyntheticPairConfig& cfg) {
  nlohmann::ordered_json j;
  j["source_nodes"] = cfg.source_nodes;
  j["target_nodes"] = cfg.target_nodes;
  j["source_dim"] = cfg.source_dim;
  j["target_dim"] = cfg.target_dim;
  j["communities"] = cfg.communities;
  j["intra_edge_prob"] = cfg.intra_edge_prob;
  j["inter_edge_prob"] = cfg.inter_edge_prob;
  j["source_anomaly_ratio"] = cfg.source_anomaly_ratio;
  j["target_anomaly_ratio"] = cfg.target_anomaly_ratio;
  j["structural_extra_edges"] = cfg.structural_extra_edges;
  j["attribute_shift_magnitude"] = cfg.attribute_shift_magnitude;
  j["domain_shift_strength"] = cfg.domain_shift_strength;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

SyntheticPairConfig synthetic_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("generator config: ") + e.what());
  }
  SyntheticPairConfig cfg;
  try {
    cfg.source_nodes = j.value("source_nodes", cfg.source_nodes);
    cfg.target_nodes = j.value("target_nodes", cfg.target_nodes);
    cfg.source_dim = j.value("source_dim", cfg.source_dim);
    cfg.target_dim = j.value("target_dim", cfg.target_dim);
    cfg.communities = j.value("communities", cfg.communities);
    cfg.intra_edge_prob = j.value("intra_edge_prob", cfg.intra_edge_prob);
    cfg.inter_edge_prob = j.value("inter_edge_prob", cfg.inter_edge_prob);
    cfg.source_anomaly_ratio = j.value("source_anomaly_ratio", cfg.source_anomaly_ratio);
    cfg.target_anomaly_ratio = j.value("target_anomaly_ratio", cfg.target_anomaly_ratio);
    cfg.structural_extra_edges = j.value("structural_extra_edges", cfg.structural_extra_edges);
    cfg.attribute_shift_magnitude =
        j.value("attribute_shift_magnitude", cfg.attribute_shift_magnitude);
    cfg.domain_shift_strength = j.value("domain_shift_strength", cfg.domain_shift_strength);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("generator config: ") + e.what());
  }
  return cfg;
}

void write_cd_pair(const std::filesystem::path& out, const SyntheticPairConfig& cfg) {
  SyntheticPair pair = generate_cd_pair(cfg);
  std::filesystem::create_directories(out);
  write_dataset_dir(out / "source", pair.source);
  write_dataset_dir(out / "target", pair.target);
  std::ofstream manifest(out / "manifest.json");
  manifest << synthetic_config_to_json(cfg) << '\n';
}

}  // namespace cdgad
