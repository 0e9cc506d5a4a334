#include "cdgad/encoder.hpp"

#include <memory>
#include <numeric>

#include "cdgad/rng.hpp"

namespace cdgad {

using diff::Tape;
using diff::Var;

void EncoderParams::validate() const {
  if (dims.size() < 2 || weights.size() != dims.size() - 1) {
    throw StructuralError("encoder: dims/weights chain is inconsistent");
  }
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k].rows() != dims[k] || weights[k].cols() != dims[k + 1]) {
      throw StructuralError("encoder: weight " + std::to_string(k) + " is " +
                            std::to_string(weights[k].rows()) + "x" +
                            std::to_string(weights[k].cols()) + ", expected " +
                            std::to_string(dims[k]) + "x" + std::to_string(dims[k + 1]));
    }
    if (!weights[k].allFinite()) throw StructuralError("encoder: non-finite weight");
  }
}

EncoderParams init_encoder(const std::vector<int>& dims, std::uint64_t seed) {
  if (dims.size() < 2) throw ConfigError("encoder: need at least input and output dims");
  EncoderParams params;
  params.dims = dims;
  Rng rng(derive_seed(seed, "encoder_init"));
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[k]));
    Matrix w(dims[k], dims[k + 1]);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
    params.weights.push_back(std::move(w));
  }
  return params;
}

ScoreHeadParams init_score_head(int embedding_dim, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "score_head_init"));
  const double bound = 1.0 / std::sqrt(static_cast<double>(embedding_dim));
  ScoreHeadParams head;
  head.weight.resize(embedding_dim, 1);
  for (int i = 0; i < embedding_dim; ++i) head.weight(i, 0) = rng.uniform(-bound, bound);
  head.bias = Matrix::Zero(1, 1);
  return head;
}

BoundEncoder bind_encoder(Tape& tape, const EncoderParams& params) {
  params.validate();
  BoundEncoder bound;
  bound.weights.reserve(params.weights.size());
  for (const Matrix& w : params.weights) bound.weights.push_back(tape.parameter(w));
  return bound;
}

BoundScoreHead bind_score_head(Tape& tape, const ScoreHeadParams& head) {
  return BoundScoreHead{tape.parameter(head.weight), tape.parameter(head.bias)};
}

namespace {

// Row-stochastic matrix averaging each frontier node with its sampled
// neighbors: rows index frontiers[h], columns index frontiers[h+1].
std::shared_ptr<const SparseMatrix> aggregation_matrix(const FanoutSample& fan, int hop,
                                                       NodeId graph_nodes) {
  const auto& rows_front = fan.frontiers[hop];
  const auto& cols_front = fan.frontiers[hop + 1];
  const auto& samples = fan.samples[hop];

  std::vector<int> column_of(graph_nodes, -1);
  for (std::size_t j = 0; j < cols_front.size(); ++j) column_of[cols_front[j]] = static_cast<int>(j);

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(rows_front.size() * 8);
  for (std::size_t i = 0; i < rows_front.size(); ++i) {
    const double w = 1.0 / (1.0 + static_cast<double>(samples[i].size()));
    entries.emplace_back(static_cast<int>(i), column_of[rows_front[i]], w);
    for (NodeId u : samples[i]) {
      entries.emplace_back(static_cast<int>(i), column_of[u], w);
    }
  }
  auto m = std::make_shared<SparseMatrix>(static_cast<int>(rows_front.size()),
                                          static_cast<int>(cols_front.size()));
  m->setFromTriplets(entries.begin(), entries.end());
  m->makeCompressed();
  return m;
}

std::shared_ptr<const SparseMatrix> gather_matrix(const std::vector<int>& positions,
                                                  int source_rows) {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    entries.emplace_back(static_cast<int>(i), positions[i], 1.0);
  }
  auto m = std::make_shared<SparseMatrix>(static_cast<int>(positions.size()), source_rows);
  m->setFromTriplets(entries.begin(), entries.end());
  m->makeCompressed();
  return m;
}

Matrix base_features(const EncoderParams& params, const AttributedGraph& g,
                     const FanoutSample& fan) {
  if (g.feature_dim() != params.input_dim()) {
    throw StructuralError("encoder: feature dim " + std::to_string(g.feature_dim()) +
                          " != input dim " + std::to_string(params.input_dim()));
  }
  const int depth = params.depth();
  if (static_cast<int>(fan.samples.size()) != depth) {
    throw StructuralError("encoder: fanout sample depth " +
                          std::to_string(fan.samples.size()) + " != encoder depth " +
                          std::to_string(depth));
  }
  const auto& deepest = fan.frontiers[depth];
  Matrix x(deepest.size(), g.feature_dim());
  for (std::size_t i = 0; i < deepest.size(); ++i) x.row(i) = g.features().row(deepest[i]);
  return x;
}

}  // namespace

Var encode(Tape& tape, const BoundEncoder& enc, const EncoderParams& params,
           const AttributedGraph& g, const FanoutSample& fan) {
  const int depth = params.depth();
  Var h = tape.constant(base_features(params, g, fan));
  for (int layer = 0; layer < depth; ++layer) {
    const int hop = depth - 1 - layer;
    Var aggregated = sparse_premul(aggregation_matrix(fan, hop, g.node_count()), h);
    h = matmul(aggregated, enc.weights[layer]);
    if (layer + 1 < depth) h = relu(h);
  }
  return sparse_premul(
      gather_matrix(fan.request_positions, static_cast<int>(fan.frontiers[0].size())), h);
}

Matrix encode_plain(const EncoderParams& params, const AttributedGraph& g,
                    const FanoutSample& fan) {
  const int depth = params.depth();
  Matrix h = base_features(params, g, fan);
  for (int layer = 0; layer < depth; ++layer) {
    const int hop = depth - 1 - layer;
    h = (*aggregation_matrix(fan, hop, g.node_count()) * h) * params.weights[layer];
    if (layer + 1 < depth) h = h.cwiseMax(0.0);
  }
  Matrix out(fan.request_positions.size(), h.cols());
  for (std::size_t i = 0; i < fan.request_positions.size(); ++i) {
    out.row(i) = h.row(fan.request_positions[i]);
  }
  return out;
}

Var score_rows(Tape&, const BoundScoreHead& head, Var embeddings) {
  return add_scalar(matmul(embeddings, head.weight), head.bias);
}

Vector score_rows_plain(const ScoreHeadParams& head, const Matrix& embeddings) {
  if (embeddings.cols() != head.weight.rows()) {
    throw StructuralError("score head: embedding dim mismatch");
  }
  return (embeddings * head.weight).array() + head.bias(0, 0);
}

double score(const ScoreHeadParams& head, const Eigen::Ref<const Vector>& embedding) {
  if (embedding.size() != head.weight.rows()) {
    throw StructuralError("score head: embedding dim mismatch");
  }
  return embedding.dot(head.weight.col(0)) + head.bias(0, 0);
}

Matrix embed_all_nodes(const EncoderParams& params, const AttributedGraph& g,
                       const std::vector<int>& fanouts, int batch_size, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "embed_all"));
  Matrix out(g.node_count(), params.output_dim());
  std::vector<NodeId> nodes;
  for (NodeId start = 0; start < g.node_count(); start += batch_size) {
    const NodeId stop = std::min<NodeId>(start + batch_size, g.node_count());
    nodes.resize(stop - start);
    std::iota(nodes.begin(), nodes.end(), start);
    FanoutSample fan = sample_fanout(g, nodes, fanouts, params.depth(), rng);
    out.middleRows(start, stop - start) = encode_plain(params, g, fan);
  }
  return out;
}

}  // namespace cdgad
