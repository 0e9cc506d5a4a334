// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. Cases 6-9 and 11 share one set of benchmark runs.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "cdgad/diff/check.hpp"
#include "cdgad/isolation_forest.hpp"
#include "cdgad/metrics.hpp"
#include "cdgad/pipeline.hpp"
#include "cdgad/run_config.hpp"
#include "cdgad/synthetic.hpp"

using namespace cdgad;
using diff::Tape;
using diff::Var;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("criterion %2d %s  %s\n", criterion, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------
// Shared benchmark: the default synthetic pair, five training seeds, every
// ablation variant. Computed once.
// ---------------------------------------------------------------------------

TrainConfig benchmark_train_config(std::uint64_t seed) {
  TrainConfig cfg;
  // desk-scale training schedule: the default graphs see an order of
  // magnitude fewer optimiser steps per epoch than the full-scale setup, so
  // the deviation stages run hotter and the network is slimmer
  cfg.source_epochs = 150;
  cfg.source_lr = 0.02;
  cfg.align_epochs = 50;
  cfg.align_lr = 1e-3;
  cfg.refit_epochs = 50;
  cfg.refit_lr = 5e-3;
  cfg.batch_size = 64;
  cfg.source_hidden = {32, 32};
  cfg.target_hidden = {24, 24};
  cfg.embedding_dim = 16;
  cfg.sampler.fanouts = {25, 10};
  cfg.sampler.negatives_per_centre = 5;
  cfg.sinkhorn.epsilon = 0.05;
  cfg.sinkhorn.max_iterations = 150;
  cfg.align_on_full_batch = false;  // centre clouds keep the transport tractable
  cfg.curve_every = 10;
  cfg.seed = seed;
  return cfg;
}

struct BenchmarkRuns {
  SyntheticPair pair;
  std::map<Variant, std::vector<double>> auc;
  std::vector<double> raw_if_auc;
  std::vector<double> curve_ratio;
  // per-seed artifacts reused by the alpha sweep
  std::vector<ModelBundle> sources;
  std::vector<EncoderParams> aligned;
  double ablation_seconds = 0.0;

  explicit BenchmarkRuns(SyntheticPair p) : pair(std::move(p)) {}
};

const BenchmarkRuns& benchmark() {
  static BenchmarkRuns runs = [] {
    // the default seeded pair
    BenchmarkRuns r(generate_cd_pair(SyntheticPairConfig{}));
    const auto& labels = r.pair.target.evaluation_labels();

    const std::vector<Variant> variants = {Variant::kConOnly, Variant::kDomOnly,
                                           Variant::kJoint,   Variant::kEtaS,
                                           Variant::kActIf,   Variant::kFull};
    const auto t0 = Clock::now();
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      TrainConfig cfg = benchmark_train_config(seed);
      auto results = run_variants(r.pair.source, r.pair.target, cfg, variants);
      for (Variant v : variants) {
        r.auc[v].push_back(auc_roc(results.at(v).final_scores.scores, labels));
      }
      const auto& curve = results.at(Variant::kFull).align.curve;
      r.curve_ratio.push_back(curve.back().divergence / curve.front().divergence);
      r.sources.push_back(results.at(Variant::kFull).source);
      r.aligned.push_back(results.at(Variant::kFull).align.target_encoder);
      IsolationForest raw = IsolationForest::fit(
          r.pair.target.features(),
          ForestConfig{100, 256, derive_seed(seed, "baseline_forest")});
      r.raw_if_auc.push_back(auc_roc(raw.score(r.pair.target.features()), labels));
    }
    r.ablation_seconds = seconds_since(t0);
    return r;
  }();
  return runs;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// 30-node source graph + frozen batch used by the gradient criterion
struct GradientFixture {
  SyntheticPair pair;
  EncoderParams encoder;
  NodeBatch batch;
  static GradientFixture make() {
    SyntheticPairConfig gen;
    gen.source_nodes = 30;
    gen.target_nodes = 30;
    gen.source_dim = 5;
    gen.target_dim = 5;
    gen.communities = 2;
    gen.intra_edge_prob = 0.3;
    gen.inter_edge_prob = 0.05;
    gen.source_anomaly_ratio = 0.15;
    gen.structural_extra_edges = 3;
    gen.attribute_shift_magnitude = 4.0;
    gen.seed = 11;
    GradientFixture f{generate_cd_pair(gen), {}, {}};
    f.encoder = init_encoder({5, 6, 4}, 21);  // 2-layer encoder
    SamplerConfig sc;
    sc.batch_size = 8;
    sc.negatives_per_centre = 2;
    sc.fanouts = {4, 4};
    sc.seed = 31;
    BatchSampler sampler(f.pair.source, sc, 2);
    f.batch = *sampler.next_batch();
    return f;
  }
};

}  // namespace

TEST_CASE("criterion 1: loss gradients through the encoder match finite differences") {
  const auto t0 = Clock::now();
  GradientFixture f = GradientFixture::make();
  const AttributedGraph& g = f.pair.source;
  const int centres = static_cast<int>(f.batch.centres.size());
  const int q = f.batch.negatives_per_centre();
  const double h = 1e-6;

  auto contrastive_build = [&](Tape& tape, const std::vector<Var>& weights) {
    BoundEncoder enc{weights};
    Var z = encode(tape, enc, f.encoder, g, f.batch.fanout);
    return contrastive_loss(tape, row_slice(z, 0, centres), row_slice(z, centres, centres),
                            row_slice(z, 2 * centres, centres * q), q);
  };
  const double con_err = diff::finite_difference_check(contrastive_build, f.encoder.weights, h);

  ScoreHeadParams head = init_score_head(4, 41);
  Vector labels(centres);
  for (int i = 0; i < centres; ++i) {
    labels(i) = g.training_labels()[f.batch.centres[i]];
  }
  auto deviation_build = [&](Tape& tape, const std::vector<Var>& weights) {
    BoundEncoder enc{weights};
    Var z = encode(tape, enc, f.encoder, g, f.batch.fanout);
    Var z_centres = row_slice(z, 0, centres);
    BoundScoreHead bound{tape.constant(head.weight), tape.constant(head.bias)};
    return deviation_loss(tape, score_rows(tape, bound, z_centres), labels, 0.0, 1.0, 5.0);
  };
  const double dev_err = diff::finite_difference_check(deviation_build, f.encoder.weights, h);

  // transport divergence against a frozen reference cloud; the analytic
  // gradient follows the dual envelope at tight convergence
  SinkhornConfig sk;
  sk.epsilon = 0.1;
  sk.max_iterations = 20000;
  sk.tolerance = 1e-13;
  Rng ref_rng(7);
  Matrix reference(12, 4);
  for (Eigen::Index i = 0; i < reference.size(); ++i) {
    reference.data()[i] = ref_rng.uniform(-1.0, 1.0);
  }
  auto embed = [&](const std::vector<Matrix>& weights) {
    EncoderParams p = f.encoder;
    p.weights = weights;
    return encode_plain(p, g, f.batch.fanout);
  };
  auto sinkhorn_value = [&](const std::vector<Matrix>& weights) {
    return sinkhorn_divergence_value(reference, embed(weights), sk);
  };
  std::vector<Matrix> analytic;
  {
    Tape tape;
    BoundEncoder enc = bind_encoder(tape, f.encoder);
    Var z = encode(tape, enc, f.encoder, g, f.batch.fanout);
    SinkhornResult s = sinkhorn_divergence(reference, tape.value(z), sk);
    REQUIRE(s.converged);
    tape.backward(z, s.grad_target);
    for (Var w : enc.weights) analytic.push_back(tape.gradient(w));
  }
  const double ot_err =
      diff::finite_difference_check(sinkhorn_value, f.encoder.weights, analytic, 1e-5);

  const double elapsed = seconds_since(t0);
  const bool ok = con_err < 1e-4 && dev_err < 1e-4 && ot_err < 1e-4 && elapsed < 30.0;
  report(1, ok,
         "max rel err: contrastive " + std::to_string(con_err) + ", deviation " +
             std::to_string(dev_err) + ", transport " + std::to_string(ot_err) + " (" +
             std::to_string(elapsed) + "s)");
  CHECK(ok);
}

TEST_CASE("criterion 2: deviation closed forms are exact") {
  DeviationConfig cfg;
  auto value = [&](double score, int label) {
    Vector s(1);
    s << score;
    return deviation_loss(s, {label}, cfg).value;
  };
  const bool ok = std::abs(value(0.0, 0) - 0.0) <= 1e-12 &&
                  std::abs(value(5.0, 1) - 0.0) <= 1e-12 &&
                  std::abs(value(0.0, 1) - 5.0) <= 1e-12 &&
                  std::abs(value(-2.0, 0) - 2.0) <= 1e-12;
  report(2, ok, "four closed-form cases at 1e-12");
  CHECK(ok);
}

TEST_CASE("criterion 3: transport divergence properties") {
  const auto t0 = Clock::now();
  Rng rng(3);
  SinkhornConfig cfg;
  bool ok = true;
  std::string notes;

  // self-divergence on clouds up to 256 x 64 with entries in [-10, 10]
  for (auto [rows, cols] : {std::pair{16, 8}, std::pair{100, 32}, std::pair{256, 64}}) {
    Matrix cloud(rows, cols);
    for (Eigen::Index i = 0; i < cloud.size(); ++i) cloud.data()[i] = rng.uniform(-10, 10);
    const double self = std::abs(sinkhorn_divergence_value(cloud, cloud, cfg));
    if (self > 1e-6) {
      ok = false;
      notes += " self(" + std::to_string(rows) + ")=" + std::to_string(self);
    }
  }

  // symmetry
  for (int trial = 0; trial < 3; ++trial) {
    Matrix a(14 + trial, 6), b(11, 6);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(-2, 2);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.uniform(-2, 2);
    const double gap = std::abs(sinkhorn_divergence_value(a, b, cfg) -
                                sinkhorn_divergence_value(b, a, cfg));
    if (gap > 1e-9) {
      ok = false;
      notes += " asym=" + std::to_string(gap);
    }
  }

  // single atom
  Matrix x(1, 2), y(1, 2);
  x << 0, 0;
  y << 3, 4;
  const double atom = sinkhorn_divergence_value(x, y, cfg);
  if (std::abs(atom - 25.0) > 1e-6) {
    ok = false;
    notes += " atom=" + std::to_string(atom);
  }

  // brute-force assignment oracle on tiny equal clouds at sharp blur
  SinkhornConfig sharp;
  sharp.epsilon = 0.01;
  sharp.max_iterations = 50000;
  sharp.tolerance = 1e-12;
  int compared = 0;
  for (int rows : {2, 3, 4}) {
    for (int trial = 0; trial < 4; ++trial) {
      Matrix a(rows, 2), b(rows, 2);
      for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(0, 2);
      for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.uniform(0, 2);
      std::vector<int> perm(rows);
      std::iota(perm.begin(), perm.end(), 0);
      double exact = std::numeric_limits<double>::infinity();
      do {
        double cost = 0;
        for (int i = 0; i < rows; ++i) cost += (a.row(i) - b.row(perm[i])).squaredNorm();
        exact = std::min(exact, cost / rows);
      } while (std::next_permutation(perm.begin(), perm.end()));
      if (exact < 0.2) continue;  // relative tolerance needs a nonvanishing value
      ++compared;
      const double approx = sinkhorn_divergence_value(a, b, sharp);
      if (std::abs(approx - exact) / exact >= 0.05) {
        ok = false;
        notes += " bf(" + std::to_string(rows) + ")=" + std::to_string(approx) + "/" +
                 std::to_string(exact);
      }
    }
  }
  if (compared < 4) {
    ok = false;
    notes += " too-few-bf-instances";
  }

  const double elapsed = seconds_since(t0);
  if (elapsed >= 60.0) ok = false;
  report(3, ok, "self/symmetry/atom/assignment checks (" + std::to_string(elapsed) + "s)" +
                    notes);
  CHECK(ok);
}

TEST_CASE("criterion 4: Cantelli selector is definitionally exact") {
  Rng rng(17);
  bool ok = true;
  const double alpha = 2.5;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 8 + static_cast<int>(rng.uniform_index(120));
    Vector scores(n);
    for (int i = 0; i < n; ++i) scores(i) = rng.normal();
    if (trial % 3 == 0) scores(static_cast<int>(rng.uniform_index(n))) += 30.0;
    const double m = scores.mean();
    const double sd = std::sqrt((scores.array() - m).square().mean());
    const double threshold = m + alpha * sd;
    try {
      PseudoLabelSet pseudo = select_pseudo_labels(scores, alpha, 25.0);
      std::vector<bool> selected(n, false);
      for (NodeId v : pseudo.anomalies) selected[v] = true;
      for (int v = 0; v < n; ++v) {
        if (selected[v] != (scores(v) > threshold)) ok = false;
      }
    } catch (const DegenerateSelectionError&) {
      // correct only when no score clears the threshold
      for (int v = 0; v < n; ++v) {
        if (scores(v) > threshold) ok = false;
      }
    }
  }

  Vector example(8);
  example << 0, 0, 0, 0, 0, 0, 0, 8;
  PseudoLabelSet pseudo = select_pseudo_labels(example, alpha, 25.0);
  if (pseudo.anomalies != std::vector<NodeId>{7}) ok = false;

  bool degenerate_raised = false;
  try {
    select_pseudo_labels(Vector::Constant(40, 2.0), alpha, 25.0);
  } catch (const DegenerateSelectionError&) {
    degenerate_raised = true;
  }
  if (!degenerate_raised) ok = false;

  report(4, ok, "1000 random vectors, worked example, constant-score error");
  CHECK(ok);
}

TEST_CASE("criterion 5: ranking metrics match their oracles") {
  Rng rng(23);
  bool ok = true;

  for (int trial = 0; trial < 200; ++trial) {
    Vector s(50);
    std::vector<int> y(50);
    int pos = 0;
    for (int i = 0; i < 50; ++i) {
      s(i) = std::floor(rng.uniform(0, 12)) / 4.0;
      y[i] = rng.bernoulli(0.3);
      pos += y[i];
    }
    if (pos == 0) y[0] = 1;
    if (pos == 50) y[0] = 0;
    // O(n^2) pairwise oracle
    double wins = 0;
    long pairs = 0;
    for (int i = 0; i < 50; ++i) {
      if (y[i] != 1) continue;
      for (int j = 0; j < 50; ++j) {
        if (y[j] != 0) continue;
        ++pairs;
        wins += s(i) > s(j) ? 1.0 : (s(i) == s(j) ? 0.5 : 0.0);
      }
    }
    if (auc_roc(s, y) != wins / static_cast<double>(pairs)) ok = false;
  }

  for (int trial = 0; trial < 200; ++trial) {
    Vector s(30);
    std::vector<int> y(30);
    int pos = 0;
    for (int i = 0; i < 30; ++i) {
      s(i) = std::floor(rng.uniform(0, 9));
      y[i] = rng.bernoulli(0.25);
      pos += y[i];
    }
    if (pos == 0) y[0] = 1;
    if (pos == 30) y[0] = 0;
    // threshold-sweep oracle over distinct thresholds
    std::set<double, std::greater<double>> thresholds(s.data(), s.data() + 30);
    const double total_pos = std::count(y.begin(), y.end(), 1);
    double area = 0, prev_recall = 0;
    for (double t : thresholds) {
      long tp = 0, fp = 0;
      for (int i = 0; i < 30; ++i) {
        if (s(i) >= t) (y[i] ? tp : fp) += 1;
      }
      const double recall = tp / total_pos;
      area += (recall - prev_recall) * (static_cast<double>(tp) / (tp + fp));
      prev_recall = recall;
    }
    if (std::abs(auc_pr(s, y) - area) > 1e-12) ok = false;
  }

  Vector flat = Vector::Constant(20, 1.0);
  std::vector<int> y(20, 0);
  y[3] = y[11] = 1;
  if (auc_roc(flat, y) != 0.5) ok = false;
  if (std::abs(auc_pr(flat, y) - 0.1) > 1e-12) ok = false;

  report(5, ok, "200 pairwise instances exact, 200 sweep instances at 1e-12, tie conventions");
  CHECK(ok);
}

TEST_CASE("criterion 6: joint alignment beats either objective alone") {
  const BenchmarkRuns& r = benchmark();
  const double joint = mean(r.auc.at(Variant::kJoint));
  const double con = mean(r.auc.at(Variant::kConOnly));
  const double dom = mean(r.auc.at(Variant::kDomOnly));
  const bool ok = joint >= con + 0.03 && joint >= dom + 0.03 &&
                  r.ablation_seconds < 600.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "joint %.3f vs con %.3f / dom %.3f (margin 0.03, %.0fs)",
                joint, con, dom, r.ablation_seconds);
  report(6, ok, buf);
  CHECK(ok);
}

TEST_CASE("criterion 7: self-labelled refit is non-inferior to its inputs") {
  const BenchmarkRuns& r = benchmark();
  const double full = mean(r.auc.at(Variant::kFull));
  const double eta = mean(r.auc.at(Variant::kEtaS));
  const double act_if = mean(r.auc.at(Variant::kActIf));
  const bool ok = full >= eta && full >= act_if;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "full %.3f vs eta_s %.3f / act_if %.3f", full, eta,
                act_if);
  report(7, ok, buf);
  CHECK(ok);
}

TEST_CASE("criterion 8: alignment halves the divergence by epoch 50") {
  const BenchmarkRuns& r = benchmark();
  bool ok = true;
  for (double ratio : r.curve_ratio) {
    if (!(ratio <= 0.5)) ok = false;
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "epoch-50/epoch-0 ratios: %.2f %.2f %.2f %.2f %.2f",
                r.curve_ratio[0], r.curve_ratio[1], r.curve_ratio[2], r.curve_ratio[3],
                r.curve_ratio[4]);
  report(8, ok, buf);
  CHECK(ok);
}

TEST_CASE("criterion 9: detection is stable across the alpha range") {
  // the sweep shares each seed's pretrain/align checkpoints and re-runs only
  // self-labelling and the refit, averaging over the five benchmark seeds
  const BenchmarkRuns& r = benchmark();
  const auto& labels = r.pair.target.evaluation_labels();
  double lo = 1.0, hi = 0.0;
  std::string values;
  for (double alpha : {2.0, 2.25, 2.5, 2.75, 3.0}) {
    std::vector<double> per_seed;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      TrainConfig swept = benchmark_train_config(seed);
      swept.self_label_alpha = alpha;
      const ModelBundle& source = r.sources[seed - 1];
      const EncoderParams& aligned = r.aligned[seed - 1];
      const ScoreVector detector =
          detector_scores(source, aligned, r.pair.target, swept, swept.detector);
      PseudoLabelSet pseudo = select_pseudo_labels(detector.scores, alpha,
                                                   swept.pseudo_normal_percentile);
      ModelBundle target = deviation_refit(r.pair.target, pseudo, aligned, swept);
      per_seed.push_back(
          auc_roc(score_target(target, r.pair.target, swept).scores, labels));
    }
    const double auc = mean(per_seed);
    lo = std::min(lo, auc);
    hi = std::max(hi, auc);
    char buf[32];
    std::snprintf(buf, sizeof(buf), " %.3f", auc);
    values += buf;
  }
  const bool ok = hi - lo <= 0.05;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "5-seed mean spread %.3f over alpha {2.0..3.0}:%s",
                hi - lo, values.c_str());
  report(9, ok, buf);
  CHECK(ok);
}

TEST_CASE("criterion 10: identical runs produce identical bytes") {
  fs::path work = fs::temp_directory_path() / "cdgad_acceptance_determinism";
  fs::remove_all(work);
  fs::create_directories(work);

  RunConfig cfg;
  SyntheticPairConfig gen;
  gen.source_nodes = 160;
  gen.target_nodes = 140;
  gen.source_dim = 8;
  gen.target_dim = 6;
  gen.intra_edge_prob = 0.06;
  gen.inter_edge_prob = 0.01;
  gen.source_anomaly_ratio = 0.1;
  gen.target_anomaly_ratio = 0.1;
  gen.structural_extra_edges = 4;
  gen.seed = 9;
  cfg.data.generator = gen;
  cfg.seeds = {3};
  cfg.train = benchmark_train_config(3);
  cfg.train.source_epochs = 6;
  cfg.train.align_epochs = 5;
  cfg.train.refit_epochs = 5;
  cfg.train.batch_size = 32;
  cfg.train.self_label_alpha = 1.5;
  cfg.train.curve_every = 2;
  const fs::path config_path = work / "config.json";
  std::ofstream(config_path) << run_config_to_json(cfg) << "\n";

  auto run_once = [&](const fs::path& out) {
    const std::string cmd = std::string(CDGAD_CLI_PATH) + " run --config " +
                            config_path.string() + " --stage all --out " + out.string() +
                            " >" + (work / "log.txt").string() + " 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  bool ok = run_once(work / "run_a") == 0 && run_once(work / "run_b") == 0;

  auto file_bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };
  const char* artifacts[] = {"metrics.json",
                             "metrics.txt",
                             "seed_3/checkpoints/source.json",
                             "seed_3/checkpoints/source.bin",
                             "seed_3/checkpoints/target_aligned.json",
                             "seed_3/checkpoints/target_aligned.bin",
                             "seed_3/checkpoints/target.json",
                             "seed_3/checkpoints/target.bin",
                             "seed_3/alignment_curve.csv",
                             "seed_3/target_scores.csv"};
  std::string mismatches;
  for (const char* f : artifacts) {
    if (!fs::exists(work / "run_a" / f) ||
        file_bytes(work / "run_a" / f) != file_bytes(work / "run_b" / f)) {
      ok = false;
      mismatches += std::string(" ") + f;
    }
  }
  report(10, ok, ok ? "checkpoints, metrics, curves and scores byte-identical"
                    : "mismatch in" + mismatches);
  CHECK(ok);
}

TEST_CASE("criterion 11: full pipeline beats the raw-feature baseline") {
  const BenchmarkRuns& r = benchmark();
  const double full = mean(r.auc.at(Variant::kFull));
  const double baseline = mean(r.raw_if_auc);
  const bool ok = full >= baseline + 0.05;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "full %.3f vs raw-feature forest %.3f (margin 0.05)",
                full, baseline);
  report(11, ok, buf);
  CHECK(ok);
}
