#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cdgad/checkpoint.hpp"
#include "cdgad/encoder.hpp"
#include "cdgad/graph.hpp"
#include "cdgad/isolation_forest.hpp"
#include "cdgad/losses.hpp"
#include "cdgad/metrics.hpp"
#include "cdgad/sampler.hpp"

namespace cdgad {

struct TrainConfig {
  int source_epochs = 50;
  double source_lr = 1e-3;
  int align_epochs = 50;
  double align_lr = 1e-4;
  // contrastive-only epochs before the alternating loop starts; zero runs
  // the alternation from scratch
  int contrastive_warmup_epochs = 0;
  int refit_epochs = 50;  // 0 keeps the aligned encoder and a fresh head
  double refit_lr = 1e-4;
  int batch_size = 128;

  double self_label_alpha = 2.5;           // Cantelli multiplier
  double pseudo_normal_percentile = 25.0;  // q
  std::string detector = "iforest";        // or "eta_s"
  // deviation-training batches draw half their centres from the anomaly
  // pool (oversampled with replacement); off = natural epoch permutation
  bool balanced_deviation_batches = true;
  // divergence-step target cloud: the whole contrastive batch (centres,
  // positives and negatives) or just the centre embeddings
  bool align_on_full_batch = true;
  // align only labelled-normal source batches (one-class alignment); off
  // feeds every source node to the alignment loss
  bool one_class_source_batches = true;
  // fraction of source nodes whose labels are visible to training
  double labelled_source_fraction = 1.0;

  std::vector<int> source_hidden = {256, 256};
  std::vector<int> target_hidden = {64, 64};
  int embedding_dim = 64;

  SamplerConfig sampler;        // batch_size/seed overridden per stage
  SinkhornConfig sinkhorn;      // training steps
  SinkhornConfig curve_sinkhorn;  // alignment-progress measurements
  DeviationConfig deviation;
  ForestConfig forest;
  int curve_every = 10;         // epochs between divergence measurements
  int curve_max_points = 512;   // per-cloud cap for those measurements

  std::uint64_t seed = 1;

  std::vector<int> source_dims(int input_dim) const;
  std::vector<int> target_dims(int input_dim) const;
  void validate() const;
};

enum class Variant { kFull, kConOnly, kDomOnly, kJoint, kEtaS, kActIf };
const char* to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct ScoreVector {
  Vector scores;
  std::vector<NodeId> node_ids;
  std::string provenance;
};

struct PseudoLabelSet {
  std::vector<NodeId> anomalies;  // scores above mean + alpha * std
  std::vector<NodeId> normals;    // bottom-q percentile
};

struct AlignmentPoint {
  int epoch = 0;  // 0 is the pre-training state
  double divergence = 0.0;
  bool converged = true;
};

struct AlignResult {
  EncoderParams target_encoder;        // psi_t*
  std::vector<AlignmentPoint> curve;   // empty when the variant skips Sinkhorn
  bool used_sinkhorn = false;
  int steps_per_epoch = 0;             // min over the two domains' batch counts
  double sinkhorn_seconds = 0.0;       // wall time spent inside the transport solver
};

// Stage 1: minibatch deviation training of the source encoder + score head.
ModelBundle pretrain_source(const AttributedGraph& g_s, const TrainConfig& cfg);

// Stage 2: alternating optimisation of the target encoder against the frozen
// source embeddings (divergence step, then contrastive step, per batch).
// kConOnly drops the divergence step, kDomOnly the contrastive step.
AlignResult joint_align(const ModelBundle& source, const AttributedGraph& g_s,
                        const AttributedGraph& g_t, const TrainConfig& cfg,
                        Variant variant = Variant::kFull);

// Cantelli thresholding (strict) plus bottom-q pseudo-normals by
// (score, node id) order. Constant scores select nothing and raise
// DegenerateSelectionError.
PseudoLabelSet select_pseudo_labels(const Vector& scores, double alpha,
                                    double percentile);

// Target embeddings under the aligned encoder, with the dedicated stream.
Matrix embed_target(const EncoderParams& target_encoder, const AttributedGraph& g_t,
                    const TrainConfig& cfg);

// Detector M for self-labelling: isolation forest on the aligned embeddings,
// or the frozen source head applied to them.
ScoreVector detector_scores(const ModelBundle& source, const EncoderParams& target_encoder,
                            const AttributedGraph& g_t, const TrainConfig& cfg,
                            const std::string& detector);

// Stage 3: deviation training on the pseudo-labelled nodes only, starting
// from psi_t* with a fresh head.
ModelBundle deviation_refit(const AttributedGraph& g_t, const PseudoLabelSet& pseudo,
                            const EncoderParams& aligned, const TrainConfig& cfg);

// Final scoring of every target node.
ScoreVector score_target(const ModelBundle& bundle, const AttributedGraph& g_t,
                         const TrainConfig& cfg);

struct PipelineResult {
  Variant variant = Variant::kFull;
  ModelBundle source;
  AlignResult align;
  std::optional<PseudoLabelSet> pseudo;   // full pipeline only
  std::optional<ModelBundle> target;      // full pipeline only
  ScoreVector final_scores;
};

// Runs one variant end to end.
PipelineResult run_variant(const AttributedGraph& g_s, const AttributedGraph& g_t,
                           const TrainConfig& cfg, Variant variant);

// Runs several variants, sharing the pretrained source model and (among
// kJoint/kEtaS/kActIf/kFull) the joint alignment. Results are identical to
// independent run_variant calls.
std::map<Variant, PipelineResult> run_variants(const AttributedGraph& g_s,
                                               const AttributedGraph& g_t,
                                               const TrainConfig& cfg,
                                               const std::vector<Variant>& variants);

// Source node ids whose labels are visible under labelled_source_fraction,
// and the labelled-normal subset used by one-class alignment.
std::vector<NodeId> labelled_source_nodes(const AttributedGraph& g_s,
                                          const TrainConfig& cfg);
std::vector<NodeId> labelled_normal_source_nodes(const AttributedGraph& g_s,
                                                 const TrainConfig& cfg);

}  // namespace cdgad
