// Command-line front end: dataset generation, staged training, ablations,
// alpha sensitivity sweeps and embedding export for cross-domain graph
// anomaly detection experiments.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cdgad/checkpoint.hpp"
#include "cdgad/graph_io.hpp"
#include "cdgad/metrics.hpp"
#include "cdgad/pipeline.hpp"
#include "cdgad/run_config.hpp"
#include "cdgad/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace cdgad;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitMissingStage = 3;
constexpr int kExitDegenerate = 4;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

fs::path seed_dir(const fs::path& out, std::uint64_t seed) {
  return out / ("seed_" + std::to_string(seed));
}

void write_scores_csv(const fs::path& path, const ScoreVector& scores) {
  std::string text = "node_id,score,provenance\n";
  for (Eigen::Index i = 0; i < scores.scores.size(); ++i) {
    text += std::to_string(scores.node_ids[i]) + "," + format_double(scores.scores(i)) +
            "," + scores.provenance + "\n";
  }
  write_text(path, text);
}

void write_curve_csv(const fs::path& path, const std::vector<AlignmentPoint>& curve) {
  std::string text = "epoch,divergence,converged\n";
  for (const AlignmentPoint& p : curve) {
    text += std::to_string(p.epoch) + "," + format_double(p.divergence) + "," +
            (p.converged ? "1" : "0") + "\n";
  }
  write_text(path, text);
}

TrainConfig seeded_train(const RunConfig& cfg, std::uint64_t seed) {
  TrainConfig t = cfg.train;
  t.seed = seed;
  return t;
}

// per-seed stage runner used by `run` and `sweep-alpha`
struct StageRunner {
  const RunConfig& cfg;
  const LoadedPair& pair;
  std::uint64_t seed;
  fs::path out;
  ordered_json stage_log = ordered_json::object();

  fs::path ckpt(const char* name) const { return seed_dir(out, seed) / "checkpoints" / name; }

  ModelBundle require_source() const {
    if (!checkpoint_exists(ckpt("source"))) {
      throw MissingStageError("pretrain", "missing pretrain checkpoint " +
                                              ckpt("source").string() +
                                              "; run --stage pretrain first");
    }
    Checkpoint c = load_checkpoint(ckpt("source"));
    if (!c.head) throw ParseError("source checkpoint has no score head");
    return ModelBundle{std::move(c.encoder), std::move(*c.head), Domain::kSource};
  }

  EncoderParams require_aligned() const {
    if (!checkpoint_exists(ckpt("target_aligned"))) {
      throw MissingStageError("align", "missing align checkpoint " +
                                           ckpt("target_aligned").string() +
                                           "; run --stage align first");
    }
    return load_checkpoint(ckpt("target_aligned")).encoder;
  }

  ModelBundle run_pretrain() {
    const auto t0 = Clock::now();
    TrainConfig train = seeded_train(cfg, seed);
    ModelBundle source = pretrain_source(pair.source, train);
    save_checkpoint(ckpt("source"), Checkpoint{"pretrain", seed, source.encoder,
                                               source.head, Domain::kSource});
    ordered_json log;
    log["seconds"] = seconds_since(t0);
    // training-split ranking quality of the freshly fitted source scorer
    const Matrix z = embed_all_nodes(source.encoder, pair.source, train.sampler.fanouts,
                                     train.batch_size, derive_seed(seed, "score/embed"));
    log["source_auc_roc"] =
        auc_roc(score_rows_plain(source.head, z), pair.source.training_labels());
    stage_log["pretrain"] = log;
    return source;
  }

  AlignResult run_align(const ModelBundle& source, Variant variant) {
    const auto t0 = Clock::now();
    TrainConfig train = seeded_train(cfg, seed);
    AlignResult aligned = joint_align(source, pair.source, pair.target, train, variant);
    save_checkpoint(ckpt("target_aligned"),
                    Checkpoint{"align", seed, aligned.target_encoder, std::nullopt,
                               Domain::kTarget});
    ordered_json log;
    log["seconds"] = seconds_since(t0);
    log["steps_per_epoch"] = aligned.steps_per_epoch;
    if (aligned.used_sinkhorn) {
      log["sinkhorn_seconds"] = aligned.sinkhorn_seconds;
      write_curve_csv(seed_dir(out, seed) / "alignment_curve.csv", aligned.curve);
    }
    stage_log["align"] = log;
    return aligned;
  }

  ScoreVector run_selflabel(const ModelBundle& source, const EncoderParams& aligned,
                            std::optional<double> alpha_override = std::nullopt) {
    const auto t0 = Clock::now();
    TrainConfig train = seeded_train(cfg, seed);
    if (alpha_override) train.self_label_alpha = *alpha_override;
    const ScoreVector detector =
        detector_scores(source, aligned, pair.target, train, train.detector);
    PseudoLabelSet pseudo = select_pseudo_labels(
        detector.scores, train.self_label_alpha, train.pseudo_normal_percentile);
    ModelBundle target = deviation_refit(pair.target, pseudo, aligned, train);
    save_checkpoint(ckpt("target"), Checkpoint{"refit", seed, target.encoder, target.head,
                                               Domain::kTarget});
    ScoreVector scores = score_target(target, pair.target, train);
    write_scores_csv(seed_dir(out, seed) / "target_scores.csv", scores);
    ordered_json log;
    log["seconds"] = seconds_since(t0);
    log["detector"] = detector.provenance;
    log["pseudo_anomalies"] = pseudo.anomalies.size();
    log["pseudo_normals"] = pseudo.normals.size();
    stage_log["selflabel"] = log;
    return scores;
  }
};

std::optional<MetricsReport> evaluate(const ScoreVector& scores,
                                      const AttributedGraph& target) {
  if (!target.has_labels()) return std::nullopt;
  return compute_metrics(scores.scores, target.evaluation_labels());
}

ordered_json metrics_to_json(const AggregateReport& agg) {
  ordered_json j;
  ordered_json runs = ordered_json::array();
  for (const MetricsReport& r : agg.runs) {
    ordered_json e;
    e["auc_roc"] = r.auc_roc;
    e["auc_pr"] = r.auc_pr;
    e["prevalence"] = r.prevalence;
    runs.push_back(e);
  }
  j["runs"] = runs;
  j["auc_roc_mean"] = agg.auc_roc_mean;
  j["auc_roc_std"] = agg.auc_roc_std;
  j["auc_pr_mean"] = agg.auc_pr_mean;
  j["auc_pr_std"] = agg.auc_pr_std;
  j["auc_roc"] = format_mean_std(agg.auc_roc_mean, agg.auc_roc_std);
  j["auc_pr"] = format_mean_std(agg.auc_pr_mean, agg.auc_pr_std);
  return j;
}

int cmd_generate(const fs::path& config_path, const fs::path& out) {
  RunConfig cfg = load_run_config(config_path);
  if (!cfg.data.generator) {
    throw ConfigError("generate: the config has no data.generator section");
  }
  write_cd_pair(out, *cfg.data.generator);
  std::cout << "wrote " << (out / "source").string() << ", " << (out / "target").string()
            << " and manifest.json\n";
  return 0;
}

int cmd_run(const fs::path& config_path, const std::string& stage,
            const std::string& variant_name, const std::string& seeds_arg,
            const fs::path& out) {
  RunConfig cfg = load_run_config(config_path);
  if (!seeds_arg.empty()) {
    cfg.seeds.clear();
    std::size_t pos = 0;
    while (pos < seeds_arg.size()) {
      const std::size_t comma = seeds_arg.find(',', pos);
      const std::string tok = seeds_arg.substr(pos, comma - pos);
      cfg.seeds.push_back(std::stoull(tok));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  const Variant variant = variant_from_string(variant_name);
  const auto wall0 = Clock::now();
  LoadedPair pair = load_pair(cfg);

  ordered_json manifest;
  manifest["config"] = ordered_json::parse(run_config_to_json(cfg));
  manifest["stage"] = stage;
  manifest["variant"] = to_string(variant);
  ordered_json per_seed = ordered_json::object();

  std::vector<MetricsReport> reports;
  for (std::uint64_t seed : cfg.seeds) {
    StageRunner runner{cfg, pair, seed, out};
    std::optional<ScoreVector> final_scores;

    if (stage == "pretrain" || stage == "all") {
      runner.run_pretrain();
    }
    if (stage == "align" || stage == "all") {
      ModelBundle source = runner.require_source();
      Variant align_variant = variant == Variant::kConOnly || variant == Variant::kDomOnly
                                  ? variant
                                  : Variant::kFull;
      AlignResult aligned = runner.run_align(source, align_variant);
      if (stage == "all" && variant != Variant::kFull) {
        // ablation scoring happens straight off the aligned encoder
        TrainConfig train = seeded_train(cfg, seed);
        const std::string detector = variant == Variant::kActIf ? "iforest" : "eta_s";
        final_scores =
            detector_scores(source, aligned.target_encoder, pair.target, train, detector);
        write_scores_csv(seed_dir(out, seed) / "target_scores.csv", *final_scores);
      }
    }
    if ((stage == "selflabel" || stage == "all") && variant == Variant::kFull) {
      ModelBundle source = runner.require_source();
      EncoderParams aligned = runner.require_aligned();
      final_scores = runner.run_selflabel(source, aligned);
    }

    per_seed[std::to_string(seed)] = runner.stage_log;
    if (final_scores) {
      if (auto report = evaluate(*final_scores, pair.target)) {
        reports.push_back(*report);
      }
    }
  }
  manifest["seeds"] = per_seed;

  if (!reports.empty()) {
    AggregateReport agg = summarize_runs(reports);
    write_text(out / "metrics.json", metrics_to_json(agg).dump(2) + "\n");
    write_text(out / "metrics.txt", format_report_text(agg));
    std::cout << format_report_text(agg);
  }
  manifest["wall_seconds"] = seconds_since(wall0);
  write_text(out / "run_manifest.json", manifest.dump(2) + "\n");
  return 0;
}

int cmd_sweep_alpha(const fs::path& config_path, const std::vector<double>& alphas,
                    const fs::path& out) {
  RunConfig cfg = load_run_config(config_path);
  for (double a : alphas) {
    if (a <= 0.0) throw ConfigError("sweep-alpha: alpha values must be positive");
  }
  LoadedPair pair = load_pair(cfg);

  std::string csv = "alpha,auc_roc,auc_pr,status\n";
  for (double alpha : alphas) {
    std::vector<MetricsReport> reports;
    std::string status = "ok";
    for (std::uint64_t seed : cfg.seeds) {
      StageRunner runner{cfg, pair, seed, out};
      ModelBundle source = runner.require_source();
      EncoderParams aligned = runner.require_aligned();
      try {
        ScoreVector scores = runner.run_selflabel(source, aligned, alpha);
        if (auto report = evaluate(scores, pair.target)) reports.push_back(*report);
      } catch (const DegenerateSelectionError&) {
        status = "degenerate";
        break;
      }
    }
    char row[160];
    if (status == "ok" && !reports.empty()) {
      AggregateReport agg = summarize_runs(reports);
      std::snprintf(row, sizeof(row), "%.6g,%.6f,%.6f,ok\n", alpha, agg.auc_roc_mean,
                    agg.auc_pr_mean);
    } else {
      std::snprintf(row, sizeof(row), "%.6g,,,%s\n", alpha, status.c_str());
    }
    csv += row;
  }
  write_text(out / "alpha_sweep.csv", csv);
  std::cout << csv;
  return 0;
}

int cmd_export_embeddings(const fs::path& config_path, const fs::path& run_dir,
                          std::uint64_t seed, const std::string& stage,
                          const fs::path& out_file) {
  RunConfig cfg = load_run_config(config_path);
  LoadedPair pair = load_pair(cfg);
  TrainConfig train = seeded_train(cfg, seed);

  const fs::path ckpts = seed_dir(run_dir, seed) / "checkpoints";
  if (!checkpoint_exists(ckpts / "source")) {
    throw MissingStageError("pretrain", "missing pretrain checkpoint under " +
                                            ckpts.string());
  }
  Checkpoint source = load_checkpoint(ckpts / "source");
  const char* target_name = stage == "refit" ? "target" : "target_aligned";
  if (!checkpoint_exists(ckpts / target_name)) {
    throw MissingStageError(stage == "refit" ? "selflabel" : "align",
                            "missing " + stage + " checkpoint under " + ckpts.string());
  }
  Checkpoint target = load_checkpoint(ckpts / target_name);

  const Matrix z_s = embed_all_nodes(source.encoder, pair.source, train.sampler.fanouts,
                                     train.batch_size, derive_seed(seed, "export/src"));
  const Matrix z_t = embed_all_nodes(target.encoder, pair.target, train.sampler.fanouts,
                                     train.batch_size, derive_seed(seed, "export/tgt"));

  std::string csv = "node_id,domain,stage,label";
  for (int j = 0; j < z_s.cols(); ++j) csv += ",z" + std::to_string(j);
  csv += "\n";
  auto append_rows = [&](const Matrix& z, const AttributedGraph& g, const char* domain) {
    const std::vector<int>* labels = g.has_labels() ? &g.evaluation_labels() : nullptr;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      csv += std::to_string(i);
      csv += ",";
      csv += domain;
      csv += ",";
      csv += stage;
      csv += ",";
      csv += labels ? std::to_string((*labels)[i]) : std::string("-1");
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
        csv += "," + format_double(z(i, j));
      }
      csv += "\n";
    }
  };
  append_rows(z_s, pair.source, "source");
  append_rows(z_t, pair.target, "target");
  write_text(out_file, csv);
  std::cout << "wrote " << out_file.string() << " (" << (z_s.rows() + z_t.rows())
            << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-domain graph anomaly detection toolkit"};
  app.require_subcommand(1);

  auto* init = app.add_subcommand("init", "write a full-default config template");
  std::string init_out = "cdgad.json";
  init->add_option("--out", init_out, "where to write the template");

  auto* generate = app.add_subcommand("generate", "emit a synthetic dataset pair");
  std::string gen_config, gen_out;
  generate->add_option("--config", gen_config, "run config JSON")->required();
  generate->add_option("--out", gen_out, "output directory")->required();

  auto* run = app.add_subcommand("run", "train and evaluate");
  std::string run_config, run_stage = "all", run_variant = "full", run_seeds, run_out;
  run->add_option("--config", run_config, "run config JSON")->required();
  run->add_option("--stage", run_stage, "pretrain|align|selflabel|all")
      ->check(CLI::IsMember({"pretrain", "align", "selflabel", "all"}));
  run->add_option("--variant", run_variant,
                  "full|con_only|dom_only|joint|eta_s|act_if");
  run->add_option("--seeds", run_seeds, "comma-separated seed list (overrides config)");
  run->add_option("--out", run_out, "output directory")->required();

  auto* sweep = app.add_subcommand("sweep-alpha", "self-label sensitivity sweep");
  std::string sweep_config, sweep_out;
  std::vector<double> sweep_alphas;
  sweep->add_option("--config", sweep_config, "run config JSON")->required();
  sweep->add_option("--alphas", sweep_alphas, "alpha values")->required()->delimiter(',');
  sweep->add_option("--out", sweep_out, "run directory with checkpoints")->required();

  auto* exporter = app.add_subcommand("export-embeddings", "dump embeddings as CSV");
  std::string exp_config, exp_run, exp_stage = "align", exp_out;
  std::uint64_t exp_seed = 1;
  exporter->add_option("--config", exp_config, "run config JSON")->required();
  exporter->add_option("--run", exp_run, "run directory with checkpoints")->required();
  exporter->add_option("--seed", exp_seed, "seed whose checkpoints to export");
  exporter->add_option("--stage", exp_stage, "align|refit")
      ->check(CLI::IsMember({"align", "refit"}));
  exporter->add_option("--out", exp_out, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*init) {
      RunConfig defaults;
      defaults.data.generator = SyntheticPairConfig{};
      write_text(init_out, run_config_to_json(defaults) + "\n");
      std::cout << "wrote " << init_out << "\n";
      return 0;
    }
    if (*generate) return cmd_generate(gen_config, gen_out);
    if (*run) return cmd_run(run_config, run_stage, run_variant, run_seeds, run_out);
    if (*sweep) return cmd_sweep_alpha(sweep_config, sweep_alphas, sweep_out);
    if (*exporter) {
      return cmd_export_embeddings(exp_config, exp_run, exp_seed, exp_stage, exp_out);
    }
  } catch (const MissingStageError& e) {
    std::cerr << "error (missing stage '" << e.stage() << "'): " << e.what() << "\n";
    return kExitMissingStage;
  } catch (const DegenerateSelectionError& e) {
    std::cerr << "error (degenerate selection): " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const ConfigError& e) {
    std::cerr << "error (config): " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "error (parse): " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
