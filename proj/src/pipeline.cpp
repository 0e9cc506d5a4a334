#include "cdgad/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "cdgad/diff/adam.hpp"
#include "cdgad/rng.hpp"

namespace cdgad {

using diff::AdamState;
using diff::Tape;
using diff::Var;

std::vector<int> TrainConfig::source_dims(int input_dim) const {
  std::vector<int> dims{input_dim};
  dims.insert(dims.end(), source_hidden.begin(), source_hidden.end());
  dims.push_back(embedding_dim);
  return dims;
}

std::vector<int> TrainConfig::target_dims(int input_dim) const {
  std::vector<int> dims{input_dim};
  dims.insert(dims.end(), target_hidden.begin(), target_hidden.end());
  dims.push_back(embedding_dim);
  return dims;
}

void TrainConfig::validate() const {
  if (source_lr <= 0.0 || align_lr <= 0.0 || refit_lr <= 0.0) {
    throw ConfigError("train: learning rates must be positive");
  }
  if (source_epochs < 1 || align_epochs < 1) {
    throw ConfigError("train: source/alignment epochs must be >= 1");
  }
  if (refit_epochs < 0) throw ConfigError("train: refit epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (self_label_alpha <= 0.0) throw ConfigError("train: alpha must be positive");
  if (pseudo_normal_percentile <= 0.0 || pseudo_normal_percentile >= 100.0) {
    throw ConfigError("train: q must lie in (0, 100)");
  }
  if (labelled_source_fraction <= 0.0 || labelled_source_fraction > 1.0) {
    throw ConfigError("train: labelled fraction must lie in (0, 1]");
  }
  if (detector != "iforest" && detector != "eta_s") {
    throw ConfigError("train: detector must be 'iforest' or 'eta_s'");
  }
  if (source_hidden.empty() || target_hidden.empty() || embedding_dim < 1) {
    throw ConfigError("train: encoder widths are invalid");
  }
  if (source_hidden.size() != target_hidden.size()) {
    throw ConfigError("train: source/target encoder depths must match");
  }
  if (curve_every < 1 || curve_max_points < 2) {
    throw ConfigError("train: curve settings are invalid");
  }
  sinkhorn.validate();
  curve_sinkhorn.validate();
  deviation.validate();
}

const char* to_string(Variant v) {
  switch (v) {
    case Variant::kFull:
      return "full";
    case Variant::kConOnly:
      return "con_only";
    case Variant::kDomOnly:
      return "dom_only";
    case Variant::kJoint:
      return "joint";
    case Variant::kEtaS:
      return "eta_s";
    case Variant::kActIf:
      return "act_if";
  }
  return "full";
}

Variant variant_from_string(const std::string& name) {
  if (name == "full") return Variant::kFull;
  if (name == "con_only") return Variant::kConOnly;
  if (name == "dom_only") return Variant::kDomOnly;
  if (name == "joint") return Variant::kJoint;
  if (name == "eta_s") return Variant::kEtaS;
  if (name == "act_if") return Variant::kActIf;
  throw ConfigError("unknown variant '" + name + "'");
}

namespace {

SamplerConfig stage_sampler(const TrainConfig& cfg, std::uint64_t stream_seed,
                            bool with_pairs) {
  SamplerConfig s = cfg.sampler;
  s.batch_size = cfg.batch_size;
  s.seed = stream_seed;
  s.sample_pairs = with_pairs;
  return s;
}

void apply_adam(Tape& tape, const std::vector<Var>& vars,
                const std::vector<Matrix*>& params, AdamState& state) {
  std::vector<Matrix> grads;
  grads.reserve(vars.size());
  for (Var v : vars) grads.push_back(tape.gradient(v));
  std::vector<const Matrix*> grad_ptrs;
  grad_ptrs.reserve(grads.size());
  for (const Matrix& g : grads) grad_ptrs.push_back(&g);
  adam_step(params, grad_ptrs, state);
}

std::vector<Matrix*> model_params(EncoderParams& enc, ScoreHeadParams* head) {
  std::vector<Matrix*> params;
  for (Matrix& w : enc.weights) params.push_back(&w);
  if (head) {
    params.push_back(&head->weight);
    params.push_back(&head->bias);
  }
  return params;
}

Vector batch_labels(const std::vector<NodeId>& nodes, const std::vector<int>& labels) {
  Vector y(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) y(i) = labels[nodes[i]];
  return y;
}

// deterministic cap: seeded shuffle, first `cap`, ascending ids
std::vector<NodeId> capped_subset(std::vector<NodeId> pool, int cap, std::uint64_t seed) {
  if (static_cast<int>(pool.size()) <= cap) return pool;
  Rng rng(seed);
  rng.shuffle(pool);
  pool.resize(cap);
  std::sort(pool.begin(), pool.end());
  return pool;
}

// Minibatches for deviation training. Balanced mode fills half of every
// batch with anomaly-labelled centres drawn with replacement, which keeps
// the margin term from being washed out by the majority class; natural mode
// is a plain epoch permutation over the whole pool.
class DeviationBatcher {
 public:
  DeviationBatcher(const AttributedGraph& g, std::vector<NodeId> normals,
                   std::vector<NodeId> anomalies, bool balanced, const TrainConfig& cfg,
                   int depth, std::uint64_t stream_seed)
      : graph_(g),
        normals_(std::move(normals)),
        anomalies_(std::move(anomalies)),
        balanced_(balanced),
        batch_size_(cfg.batch_size),
        fanouts_(cfg.sampler.fanouts),
        depth_(depth),
        rng_(stream_seed) {
    if (!balanced_) {
      pool_ = normals_;
      pool_.insert(pool_.end(), anomalies_.begin(), anomalies_.end());
      std::sort(pool_.begin(), pool_.end());
    }
    start_epoch();
  }

  void start_epoch() {
    rng_.shuffle(balanced_ ? normals_ : pool_);
    cursor_ = 0;
  }

  std::optional<std::pair<std::vector<NodeId>, FanoutSample>> next_batch() {
    const auto& walk = balanced_ ? normals_ : pool_;
    if (cursor_ >= walk.size()) return std::nullopt;
    std::vector<NodeId> centres;
    if (balanced_) {
      const std::size_t half = std::max<std::size_t>(1, batch_size_ / 2);
      const std::size_t take = std::min<std::size_t>(half, walk.size() - cursor_);
      centres.assign(walk.begin() + cursor_, walk.begin() + cursor_ + take);
      cursor_ += take;
      for (std::size_t k = 0; k < take; ++k) {
        centres.push_back(anomalies_[rng_.uniform_index(anomalies_.size())]);
      }
    } else {
      const std::size_t take =
          std::min<std::size_t>(batch_size_, walk.size() - cursor_);
      centres.assign(walk.begin() + cursor_, walk.begin() + cursor_ + take);
      cursor_ += take;
    }
    FanoutSample fan = sample_fanout(graph_, centres, fanouts_, depth_, rng_);
    return std::make_pair(std::move(centres), std::move(fan));
  }

 private:
  const AttributedGraph& graph_;
  std::vector<NodeId> normals_;
  std::vector<NodeId> anomalies_;
  std::vector<NodeId> pool_;
  bool balanced_;
  std::size_t batch_size_;
  std::vector<int> fanouts_;
  int depth_;
  std::size_t cursor_ = 0;
  Rng rng_;
};

}  // namespace

namespace {

// shared minibatch loop of the two deviation-training stages
void train_deviation_stage(const AttributedGraph& g, const std::vector<int>& labels,
                           ModelBundle& model, DeviationBatcher& batcher,
                           const TrainConfig& cfg, int epochs, double lr,
                           std::uint64_t reference_seed) {
  std::vector<Matrix*> params = model_params(model.encoder, &model.head);
  AdamState adam = AdamState::create({params.begin(), params.end()}, lr);
  Rng reference_rng(reference_seed);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    while (auto batch = batcher.next_batch()) {
      const auto& [centres, fanout] = *batch;
      Tape tape;
      BoundEncoder enc = bind_encoder(tape, model.encoder);
      BoundScoreHead head = bind_score_head(tape, model.head);
      Var z = encode(tape, enc, model.encoder, g, fanout);
      Var scores = score_rows(tape, head, z);
      const auto [mu, sigma] = deviation_reference(cfg.deviation, reference_rng);
      Var loss = deviation_loss(tape, scores, batch_labels(centres, labels), mu, sigma,
                                cfg.deviation.margin);
      tape.backward(loss);
      std::vector<Var> vars(enc.weights);
      vars.push_back(head.weight);
      vars.push_back(head.bias);
      apply_adam(tape, vars, params, adam);
    }
    batcher.start_epoch();
  }
}

}  // namespace

std::vector<NodeId> labelled_source_nodes(const AttributedGraph& g_s,
                                          const TrainConfig& cfg) {
  if (!g_s.has_labels()) throw ConfigError("pretrain: source graph has no labels");
  std::vector<NodeId> ids(g_s.node_count());
  std::iota(ids.begin(), ids.end(), 0);
  if (cfg.labelled_source_fraction >= 1.0) return ids;
  Rng rng(derive_seed(cfg.seed, "label_mask"));
  rng.shuffle(ids);
  const auto keep = static_cast<std::size_t>(std::ceil(
      cfg.labelled_source_fraction * static_cast<double>(g_s.node_count())));
  ids.resize(std::max<std::size_t>(keep, 1));
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<NodeId> labelled_normal_source_nodes(const AttributedGraph& g_s,
                                                 const TrainConfig& cfg) {
  const auto& labels = g_s.training_labels();
  std::vector<NodeId> normals;
  for (NodeId v : labelled_source_nodes(g_s, cfg)) {
    if (labels[v] == 0) normals.push_back(v);
  }
  return normals;
}

ModelBundle pretrain_source(const AttributedGraph& g_s, const TrainConfig& cfg) {
  cfg.validate();
  const std::vector<NodeId> pool = labelled_source_nodes(g_s, cfg);
  const auto& labels = g_s.training_labels();
  long anomalies = 0;
  for (NodeId v : pool) anomalies += labels[v];
  if (anomalies == 0 || anomalies == static_cast<long>(pool.size())) {
    throw ConfigError("pretrain: need at least one labelled anomaly and one normal");
  }

  ModelBundle model;
  model.domain = Domain::kSource;
  model.encoder = init_encoder(cfg.source_dims(static_cast<int>(g_s.feature_dim())),
                               derive_seed(cfg.seed, "pretrain/encoder"));
  model.head = init_score_head(cfg.embedding_dim, derive_seed(cfg.seed, "pretrain/head"));

  std::vector<NodeId> normal_pool, anomaly_pool;
  for (NodeId v : pool) (labels[v] == 1 ? anomaly_pool : normal_pool).push_back(v);
  DeviationBatcher batcher(g_s, std::move(normal_pool), std::move(anomaly_pool),
                           cfg.balanced_deviation_batches, cfg, model.encoder.depth(),
                           derive_seed(cfg.seed, "pretrain/sampler"));
  train_deviation_stage(g_s, labels, model, batcher, cfg, cfg.source_epochs,
                        cfg.source_lr, derive_seed(cfg.seed, "pretrain/reference"));
  return model;
}

namespace {

struct CurveProbe {
  std::vector<NodeId> source_nodes;
  std::vector<NodeId> target_nodes;
  std::uint64_t fanout_seed;
};

AlignmentPoint measure_alignment(const ModelBundle& source, const EncoderParams& psi_t,
                                 const AttributedGraph& g_s, const AttributedGraph& g_t,
                                 const TrainConfig& cfg, const CurveProbe& probe,
                                 int epoch) {
  // identical fanout draws at every measurement: the curve tracks weights only
  Rng rng_s(derive_seed(probe.fanout_seed, "src"));
  Rng rng_t(derive_seed(probe.fanout_seed, "tgt"));
  FanoutSample fan_s = sample_fanout(g_s, probe.source_nodes, cfg.sampler.fanouts,
                                     source.encoder.depth(), rng_s);
  FanoutSample fan_t =
      sample_fanout(g_t, probe.target_nodes, cfg.sampler.fanouts, psi_t.depth(), rng_t);
  const Matrix z_s = encode_plain(source.encoder, g_s, fan_s);
  const Matrix z_t = encode_plain(psi_t, g_t, fan_t);
  SinkhornResult r = sinkhorn_divergence(z_s, z_t, cfg.curve_sinkhorn);
  return AlignmentPoint{epoch, r.value, r.converged};
}

}  // namespace

AlignResult joint_align(const ModelBundle& source, const AttributedGraph& g_s,
                        const AttributedGraph& g_t, const TrainConfig& cfg,
                        Variant variant) {
  cfg.validate();
  source.encoder.validate();
  if (source.encoder.output_dim() != cfg.embedding_dim) {
    throw StructuralError("align: source embedding dim disagrees with the config");
  }

  AlignResult result;
  result.used_sinkhorn = variant != Variant::kConOnly;
  result.target_encoder = init_encoder(cfg.target_dims(static_cast<int>(g_t.feature_dim())),
                                       derive_seed(cfg.seed, "align/encoder"));
  EncoderParams& psi_t = result.target_encoder;

  const std::vector<NodeId> source_pool =
      cfg.one_class_source_batches ? labelled_normal_source_nodes(g_s, cfg)
                                   : std::vector<NodeId>{};
  if (cfg.one_class_source_batches && source_pool.empty()) {
    throw ConfigError("align: no labelled-normal source nodes available");
  }

  BatchSampler src_sampler(g_s,
                           stage_sampler(cfg, derive_seed(cfg.seed, "align/src_sampler"),
                                         /*with_pairs=*/false),
                           source.encoder.depth(), source_pool);
  BatchSampler tgt_sampler(g_t,
                           stage_sampler(cfg, derive_seed(cfg.seed, "align/tgt_sampler"),
                                         /*with_pairs=*/true),
                           psi_t.depth());

  std::vector<Matrix*> params = model_params(psi_t, nullptr);
  AdamState adam = AdamState::create({params.begin(), params.end()}, cfg.align_lr);

  CurveProbe probe;
  if (result.used_sinkhorn) {
    probe.source_nodes =
        capped_subset(cfg.one_class_source_batches ? source_pool
                                                   : labelled_normal_source_nodes(g_s, cfg),
                      cfg.curve_max_points, derive_seed(cfg.seed, "align/curve_src"));
    std::vector<NodeId> all_t(g_t.node_count());
    std::iota(all_t.begin(), all_t.end(), 0);
    probe.target_nodes = capped_subset(std::move(all_t), cfg.curve_max_points,
                                       derive_seed(cfg.seed, "align/curve_tgt"));
    probe.fanout_seed = derive_seed(cfg.seed, "align/curve_fanout");
  }

  const int steps_per_epoch =
      std::min(src_sampler.batches_per_epoch(), tgt_sampler.batches_per_epoch());
  result.steps_per_epoch = steps_per_epoch;
  const int q = cfg.sampler.negatives_per_centre;

  // optional contrastive-only warmup: the divergence steps start once the
  // target representation has local structure to preserve
  const int warmup = variant == Variant::kDomOnly ? 0 : cfg.contrastive_warmup_epochs;

  for (int epoch = 1 - warmup; epoch <= cfg.align_epochs; ++epoch) {
    const bool warming = epoch < 1;
    if (result.used_sinkhorn && epoch == 1) {
      // the alignment-progress baseline sits right before the first
      // divergence-optimising epoch
      const auto t0 = std::chrono::steady_clock::now();
      result.curve.push_back(
          measure_alignment(source, psi_t, g_s, g_t, cfg, probe, /*epoch=*/0));
      result.sinkhorn_seconds +=
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    for (int step = 0; step < steps_per_epoch; ++step) {
      auto src_batch = src_sampler.next_batch();
      auto tgt_batch = tgt_sampler.next_batch();
      if (!src_batch || !tgt_batch) break;

      // frozen source embeddings of this step's batch
      Matrix z_s;
      if (result.used_sinkhorn && !warming) {
        z_s = encode_plain(source.encoder, g_s, src_batch->fanout);
      }

      if (variant != Variant::kConOnly && !warming) {
        // divergence step on this step's target embeddings
        Tape tape;
        BoundEncoder enc = bind_encoder(tape, psi_t);
        Var z_all = encode(tape, enc, psi_t, g_t, tgt_batch->fanout);
        Var z_t = cfg.align_on_full_batch
                      ? z_all
                      : row_slice(z_all, 0, static_cast<int>(tgt_batch->centres.size()));
        const auto t0 = std::chrono::steady_clock::now();
        SinkhornResult s = sinkhorn_divergence(z_s, tape.value(z_t), cfg.sinkhorn);
        result.sinkhorn_seconds +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        tape.backward(z_t, s.grad_target);
        apply_adam(tape, enc.weights, params, adam);
      }
      if (variant != Variant::kDomOnly) {
        // contrastive step, recomputed under the just-updated weights
        Tape tape;
        BoundEncoder enc = bind_encoder(tape, psi_t);
        Var z_t = encode(tape, enc, psi_t, g_t, tgt_batch->fanout);
        const int centres = static_cast<int>(tgt_batch->centres.size());
        Var z_u = row_slice(z_t, 0, centres);
        Var z_v = row_slice(z_t, centres, centres);
        Var z_vn = row_slice(z_t, 2 * centres, centres * q);
        Var loss = contrastive_loss(tape, z_u, z_v, z_vn, q);
        tape.backward(loss);
        apply_adam(tape, enc.weights, params, adam);
      }
    }
    src_sampler.start_epoch();
    tgt_sampler.start_epoch();

    if (result.used_sinkhorn && epoch >= 1 &&
        (epoch % cfg.curve_every == 0 || epoch == cfg.align_epochs)) {
      const auto t0 = std::chrono::steady_clock::now();
      result.curve.push_back(measure_alignment(source, psi_t, g_s, g_t, cfg, probe, epoch));
      result.sinkhorn_seconds +=
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  }
  return result;
}

PseudoLabelSet select_pseudo_labels(const Vector& scores, double alpha,
                                    double percentile) {
  if (scores.size() == 0) throw StructuralError("self-label: empty score vector");
  if (alpha <= 0.0) throw ConfigError("self-label: alpha must be positive");
  if (percentile <= 0.0 || percentile >= 100.0) {
    throw ConfigError("self-label: percentile must lie in (0, 100)");
  }
  const double mean = scores.mean();
  const double stddev = std::sqrt((scores.array() - mean).square().mean());
  const double threshold = mean + alpha * stddev;

  PseudoLabelSet pseudo;
  for (Eigen::Index v = 0; v < scores.size(); ++v) {
    if (scores(v) > threshold) pseudo.anomalies.push_back(static_cast<NodeId>(v));
  }
  if (pseudo.anomalies.empty()) {
    throw DegenerateSelectionError(
        "self-label: no score exceeds mean + alpha*std (threshold " +
        std::to_string(threshold) + "); decrease alpha");
  }

  // bottom-q percentile by nearest rank, ties broken by node id
  std::vector<NodeId> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    if (scores(a) != scores(b)) return scores(a) < scores(b);
    return a < b;
  });
  const auto keep = static_cast<std::size_t>(
      std::ceil(percentile / 100.0 * static_cast<double>(scores.size())));
  pseudo.normals.assign(order.begin(), order.begin() + keep);
  std::sort(pseudo.normals.begin(), pseudo.normals.end());

  for (NodeId v : pseudo.normals) {
    if (scores(v) > threshold) {
      throw ConfigError("self-label: pseudo-normal percentile crosses the anomaly "
                        "threshold; lower q or raise alpha");
    }
  }
  return pseudo;
}

Matrix embed_target(const EncoderParams& target_encoder, const AttributedGraph& g_t,
                    const TrainConfig& cfg) {
  return embed_all_nodes(target_encoder, g_t, cfg.sampler.fanouts, cfg.batch_size,
                         derive_seed(cfg.seed, "selflabel/embed"));
}

ScoreVector detector_scores(const ModelBundle& source, const EncoderParams& target_encoder,
                            const AttributedGraph& g_t, const TrainConfig& cfg,
                            const std::string& detector) {
  const Matrix embeddings = embed_target(target_encoder, g_t, cfg);
  ScoreVector sv;
  sv.node_ids.resize(g_t.node_count());
  std::iota(sv.node_ids.begin(), sv.node_ids.end(), 0);
  if (detector == "iforest") {
    ForestConfig forest = cfg.forest;
    forest.seed = derive_seed(cfg.seed, "selflabel/forest");
    sv.scores = IsolationForest::fit(embeddings, forest).score(embeddings);
    sv.provenance = "iforest(psi_t*)";
  } else if (detector == "eta_s") {
    sv.scores = score_rows_plain(source.head, embeddings);
    sv.provenance = "eta_s(psi_t*)";
  } else {
    throw ConfigError("detector must be 'iforest' or 'eta_s'");
  }
  return sv;
}

ModelBundle deviation_refit(const AttributedGraph& g_t, const PseudoLabelSet& pseudo,
                            const EncoderParams& aligned, const TrainConfig& cfg) {
  cfg.validate();
  if (pseudo.anomalies.empty()) {
    throw DegenerateSelectionError("refit: empty pseudo-anomaly set");
  }
  if (pseudo.normals.empty()) throw ConfigError("refit: empty pseudo-normal set");
  for (NodeId v : pseudo.anomalies) {
    if (std::binary_search(pseudo.normals.begin(), pseudo.normals.end(), v)) {
      throw StructuralError("refit: pseudo sets overlap at node " + std::to_string(v));
    }
  }

  ModelBundle model;
  model.domain = Domain::kTarget;
  model.encoder = aligned;
  model.head = init_score_head(cfg.embedding_dim, derive_seed(cfg.seed, "refit/head"));
  if (cfg.refit_epochs == 0) return model;

  // only pseudo-labelled nodes enter the loss
  std::vector<int> pseudo_labels(g_t.node_count(), 0);
  for (NodeId v : pseudo.anomalies) pseudo_labels[v] = 1;
  DeviationBatcher batcher(g_t, pseudo.normals, pseudo.anomalies,
                           cfg.balanced_deviation_batches, cfg, model.encoder.depth(),
                           derive_seed(cfg.seed, "refit/sampler"));
  train_deviation_stage(g_t, pseudo_labels, model, batcher, cfg, cfg.refit_epochs,
                        cfg.refit_lr, derive_seed(cfg.seed, "refit/reference"));
  return model;
}

ScoreVector score_target(const ModelBundle& bundle, const AttributedGraph& g_t,
                         const TrainConfig& cfg) {
  bundle.encoder.validate();
  const Matrix embeddings = embed_all_nodes(bundle.encoder, g_t, cfg.sampler.fanouts,
                                            cfg.batch_size,
                                            derive_seed(cfg.seed, "score/embed"));
  ScoreVector sv;
  sv.scores = score_rows_plain(bundle.head, embeddings);
  sv.node_ids.resize(g_t.node_count());
  std::iota(sv.node_ids.begin(), sv.node_ids.end(), 0);
  sv.provenance = bundle.domain == Domain::kTarget ? "eta_t(psi_t)" : "eta_s(psi_t)";
  return sv;
}

PipelineResult run_variant(const AttributedGraph& g_s, const AttributedGraph& g_t,
                           const TrainConfig& cfg, Variant variant) {
  auto results = run_variants(g_s, g_t, cfg, {variant});
  return std::move(results.at(variant));
}

std::map<Variant, PipelineResult> run_variants(const AttributedGraph& g_s,
                                               const AttributedGraph& g_t,
                                               const TrainConfig& cfg,
                                               const std::vector<Variant>& variants) {
  cfg.validate();
  std::map<Variant, PipelineResult> results;
  if (variants.empty()) return results;

  const ModelBundle source = pretrain_source(g_s, cfg);

  std::optional<AlignResult> joint;  // shared by every joint-alignment variant
  auto joint_result = [&]() -> const AlignResult& {
    if (!joint) joint = joint_align(source, g_s, g_t, cfg, Variant::kFull);
    return *joint;
  };

  for (Variant variant : variants) {
    PipelineResult r;
    r.variant = variant;
    r.source = source;
    switch (variant) {
      case Variant::kConOnly:
      case Variant::kDomOnly:
        r.align = joint_align(source, g_s, g_t, cfg, variant);
        r.final_scores =
            detector_scores(source, r.align.target_encoder, g_t, cfg, "eta_s");
        break;
      case Variant::kJoint:
      case Variant::kEtaS:
        r.align = joint_result();
        r.final_scores =
            detector_scores(source, r.align.target_encoder, g_t, cfg, "eta_s");
        break;
      case Variant::kActIf:
        r.align = joint_result();
        r.final_scores =
            detector_scores(source, r.align.target_encoder, g_t, cfg, "iforest");
        break;
      case Variant::kFull: {
        r.align = joint_result();
        const ScoreVector detector =
            detector_scores(source, r.align.target_encoder, g_t, cfg, cfg.detector);
        r.pseudo = select_pseudo_labels(detector.scores, cfg.self_label_alpha,
                                        cfg.pseudo_normal_percentile);
        r.target = deviation_refit(g_t, *r.pseudo, r.align.target_encoder, cfg);
        r.final_scores = score_target(*r.target, g_t, cfg);
        break;
      }
    }
    results.emplace(variant, std::move(r));
  }
  return results;
}

}  // namespace cdgad
