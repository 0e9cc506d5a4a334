#pragma once

#include <cstdint>
#include <vector>

#include "cdgad/diff/tape.hpp"
#include "cdgad/graph.hpp"
#include "cdgad/sampler.hpp"

namespace cdgad {

// Message-passing encoder: at every hop a node's incoming representation is
// the mean of its own previous-layer representation and those of its sampled
// neighbors, pushed through a learned linear map. Hidden layers use ReLU;
// the output layer is linear so the embedding space stays unconstrained.
struct EncoderParams {
  // dims chain input -> hidden ... -> embedding; weights[k] is
  // (dims[k] x dims[k+1]) and multiplies aggregated rows from the right
  std::vector<int> dims;
  std::vector<Matrix> weights;

  int depth() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return dims.front(); }
  int output_dim() const { return dims.back(); }

  void validate() const;
};

// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
EncoderParams init_encoder(const std::vector<int>& dims, std::uint64_t seed);

// Single affine scoring unit on top of an embedding row.
struct ScoreHeadParams {
  Matrix weight;  // M x 1
  Matrix bias;    // 1 x 1

  int input_dim() const { return static_cast<int>(weight.rows()); }
};

ScoreHeadParams init_score_head(int embedding_dim, std::uint64_t seed);

// Encoder + head for one domain.
struct ModelBundle {
  EncoderParams encoder;
  ScoreHeadParams head;
  Domain domain = Domain::kSource;
};

// Tape-bound copies of the trainable matrices.
struct BoundEncoder {
  std::vector<diff::Var> weights;
};
struct BoundScoreHead {
  diff::Var weight;
  diff::Var bias;
};

BoundEncoder bind_encoder(diff::Tape& tape, const EncoderParams& params);
BoundScoreHead bind_score_head(diff::Tape& tape, const ScoreHeadParams& params);

// Differentiable forward pass. Output rows follow the request order of the
// fanout sample (duplicates included), shape |requested| x M.
diff::Var encode(diff::Tape& tape, const BoundEncoder& enc, const EncoderParams& params,
                 const AttributedGraph& g, const FanoutSample& fan);

// Same arithmetic without a tape, for frozen-parameter evaluation.
Matrix encode_plain(const EncoderParams& params, const AttributedGraph& g,
                    const FanoutSample& fan);

// scores = Z w + b, one scalar per embedding row.
diff::Var score_rows(diff::Tape& tape, const BoundScoreHead& head, diff::Var embeddings);
Vector score_rows_plain(const ScoreHeadParams& head, const Matrix& embeddings);
double score(const ScoreHeadParams& head, const Eigen::Ref<const Vector>& embedding);

// Embeds every node of the graph in batches with a dedicated fanout stream.
Matrix embed_all_nodes(const EncoderParams& params, const AttributedGraph& g,
                       const std::vector<int>& fanouts, int batch_size, std::uint64_t seed);

}  // namespace cdgad
