#include "cdgad/run_config.hpp"

#include <fstream>

#include <json.hpp>

#include "cdgad/graph_io.hpp"
#include "cdgad/rng.hpp"

namespace cdgad {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
  }
}

SamplerConfig sampler_from_json(const json& j) {
  reject_unknown(j,
                 {"negatives_per_centre", "fanouts", "degree_weighted_negatives"},
                 "sampler");
  SamplerConfig s;
  s.negatives_per_centre = j.value("negatives_per_centre", s.negatives_per_centre);
  if (j.contains("fanouts")) s.fanouts = j.at("fanouts").get<std::vector<int>>();
  s.degree_weighted_negatives =
      j.value("degree_weighted_negatives", s.degree_weighted_negatives);
  return s;
}

SinkhornConfig sinkhorn_from_json(const json& j, const SinkhornConfig& base) {
  reject_unknown(j, {"epsilon", "max_iterations", "tolerance"}, "sinkhorn");
  SinkhornConfig s = base;
  s.epsilon = j.value("epsilon", s.epsilon);
  s.max_iterations = j.value("max_iterations", s.max_iterations);
  s.tolerance = j.value("tolerance", s.tolerance);
  return s;
}

DeviationConfig deviation_from_json(const json& j) {
  reject_unknown(j, {"mu", "sigma", "margin", "reference_sampling", "reference_size"},
                 "deviation");
  DeviationConfig d;
  d.mu = j.value("mu", d.mu);
  d.sigma = j.value("sigma", d.sigma);
  d.margin = j.value("margin", d.margin);
  d.reference_sampling = j.value("reference_sampling", d.reference_sampling);
  d.reference_size = j.value("reference_size", d.reference_size);
  return d;
}

ForestConfig forest_from_json(const json& j) {
  reject_unknown(j, {"n_trees", "subsample"}, "forest");
  ForestConfig f;
  f.n_trees = j.value("n_trees", f.n_trees);
  f.subsample = j.value("subsample", f.subsample);
  return f;
}

TrainConfig train_from_json(const json& j) {
  reject_unknown(j,
                 {"source_epochs", "source_lr", "align_epochs", "align_lr",
                  "contrastive_warmup_epochs", "refit_epochs", "refit_lr", "batch_size",
                  "self_label_alpha", "pseudo_normal_percentile", "detector",
                  "one_class_source_batches", "balanced_deviation_batches",
                  "align_on_full_batch", "labelled_source_fraction", "source_hidden",
                  "target_hidden", "embedding_dim", "sampler", "sinkhorn",
                  "curve_sinkhorn", "deviation", "forest", "curve_every",
                  "curve_max_points"},
                 "train");
  TrainConfig t;
  t.source_epochs = j.value("source_epochs", t.source_epochs);
  t.source_lr = j.value("source_lr", t.source_lr);
  t.align_epochs = j.value("align_epochs", t.align_epochs);
  t.align_lr = j.value("align_lr", t.align_lr);
  t.contrastive_warmup_epochs =
      j.value("contrastive_warmup_epochs", t.contrastive_warmup_epochs);
  t.refit_epochs = j.value("refit_epochs", t.refit_epochs);
  t.refit_lr = j.value("refit_lr", t.refit_lr);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.self_label_alpha = j.value("self_label_alpha", t.self_label_alpha);
  t.pseudo_normal_percentile =
      j.value("pseudo_normal_percentile", t.pseudo_normal_percentile);
  t.detector = j.value("detector", t.detector);
  t.one_class_source_batches =
      j.value("one_class_source_batches", t.one_class_source_batches);
  t.balanced_deviation_batches =
      j.value("balanced_deviation_batches", t.balanced_deviation_batches);
  t.align_on_full_batch = j.value("align_on_full_batch", t.align_on_full_batch);
  t.labelled_source_fraction =
      j.value("labelled_source_fraction", t.labelled_source_fraction);
  if (j.contains("source_hidden")) {
    t.source_hidden = j.at("source_hidden").get<std::vector<int>>();
  }
  if (j.contains("target_hidden")) {
    t.target_hidden = j.at("target_hidden").get<std::vector<int>>();
  }
  t.embedding_dim = j.value("embedding_dim", t.embedding_dim);
  if (j.contains("sampler")) t.sampler = sampler_from_json(j.at("sampler"));
  if (j.contains("sinkhorn")) t.sinkhorn = sinkhorn_from_json(j.at("sinkhorn"), t.sinkhorn);
  if (j.contains("curve_sinkhorn")) {
    t.curve_sinkhorn = sinkhorn_from_json(j.at("curve_sinkhorn"), t.curve_sinkhorn);
  }
  if (j.contains("deviation")) t.deviation = deviation_from_json(j.at("deviation"));
  if (j.contains("forest")) t.forest = forest_from_json(j.at("forest"));
  t.curve_every = j.value("curve_every", t.curve_every);
  t.curve_max_points = j.value("curve_max_points", t.curve_max_points);
  return t;
}

ordered_json sampler_to_json(const SamplerConfig& s) {
  ordered_json j;
  j["negatives_per_centre"] = s.negatives_per_centre;
  j["fanouts"] = s.fanouts;
  j["degree_weighted_negatives"] = s.degree_weighted_negatives;
  return j;
}

ordered_json sinkhorn_to_json(const SinkhornConfig& s) {
  ordered_json j;
  j["epsilon"] = s.epsilon;
  j["max_iterations"] = s.max_iterations;
  j["tolerance"] = s.tolerance;
  return j;
}

}  // namespace

void RunConfig::validate() const {
  if (seeds.empty()) throw ConfigError("config: seeds must be nonempty");
  const bool has_gen = data.generator.has_value();
  const bool has_dirs = data.source_dir && data.target_dir;
  if (has_gen == has_dirs) {
    throw ConfigError(
        "config: data must name either a generator or source/target directories");
  }
  if (max_degree < 0) throw ConfigError("config: max_degree must be >= 0");
  if (has_gen) data.generator->validate();
  train.validate();
}

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  reject_unknown(j, {"seeds", "data", "max_degree", "train"}, "config root");
  RunConfig cfg;
  try {
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("data")) {
      const json& d = j.at("data");
      reject_unknown(d, {"generator", "source_dir", "target_dir"}, "data");
      if (d.contains("generator")) {
        cfg.data.generator = synthetic_config_from_json(d.at("generator").dump());
      }
      if (d.contains("source_dir")) {
        cfg.data.source_dir = d.at("source_dir").get<std::string>();
      }
      if (d.contains("target_dir")) {
        cfg.data.target_dir = d.at("target_dir").get<std::string>();
      }
    }
    cfg.max_degree = j.value("max_degree", cfg.max_degree);
    if (j.contains("train")) cfg.train = train_from_json(j.at("train"));
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["seeds"] = cfg.seeds;
  ordered_json data;
  if (cfg.data.generator) {
    data["generator"] = ordered_json::parse(synthetic_config_to_json(*cfg.data.generator));
  }
  if (cfg.data.source_dir) data["source_dir"] = cfg.data.source_dir->string();
  if (cfg.data.target_dir) data["target_dir"] = cfg.data.target_dir->string();
  j["data"] = data;
  j["max_degree"] = cfg.max_degree;

  const TrainConfig& t = cfg.train;
  ordered_json train;
  train["source_epochs"] = t.source_epochs;
  train["source_lr"] = t.source_lr;
  train["align_epochs"] = t.align_epochs;
  train["align_lr"] = t.align_lr;
  train["contrastive_warmup_epochs"] = t.contrastive_warmup_epochs;
  train["refit_epochs"] = t.refit_epochs;
  train["refit_lr"] = t.refit_lr;
  train["batch_size"] = t.batch_size;
  train["self_label_alpha"] = t.self_label_alpha;
  train["pseudo_normal_percentile"] = t.pseudo_normal_percentile;
  train["detector"] = t.detector;
  train["one_class_source_batches"] = t.one_class_source_batches;
  train["balanced_deviation_batches"] = t.balanced_deviation_batches;
  train["align_on_full_batch"] = t.align_on_full_batch;
  train["labelled_source_fraction"] = t.labelled_source_fraction;
  train["source_hidden"] = t.source_hidden;
  train["target_hidden"] = t.target_hidden;
  train["embedding_dim"] = t.embedding_dim;
  train["sampler"] = sampler_to_json(t.sampler);
  train["sinkhorn"] = sinkhorn_to_json(t.sinkhorn);
  train["curve_sinkhorn"] = sinkhorn_to_json(t.curve_sinkhorn);
  ordered_json dev;
  dev["mu"] = t.deviation.mu;
  dev["sigma"] = t.deviation.sigma;
  dev["margin"] = t.deviation.margin;
  dev["reference_sampling"] = t.deviation.reference_sampling;
  dev["reference_size"] = t.deviation.reference_size;
  train["deviation"] = dev;
  ordered_json forest;
  forest["n_trees"] = t.forest.n_trees;
  forest["subsample"] = t.forest.subsample;
  train["forest"] = forest;
  train["curve_every"] = t.curve_every;
  train["curve_max_points"] = t.curve_max_points;
  j["train"] = train;
  return j.dump(2);
}

RunConfig load_run_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("config: cannot open " + file.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  RunConfig cfg = run_config_from_json(text);
  cfg.validate();
  return cfg;
}

LoadedPair load_pair(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.data.generator) {
    SyntheticPair pair = generate_cd_pair(*cfg.data.generator);
    if (cfg.max_degree > 0) {
      return LoadedPair{
          cap_degree(pair.source, cfg.max_degree, derive_seed(cfg.data.generator->seed,
                                                              "cap/source")),
          cap_degree(pair.target, cfg.max_degree, derive_seed(cfg.data.generator->seed,
                                                              "cap/target"))};
    }
    return LoadedPair{std::move(pair.source), std::move(pair.target)};
  }
  AttributedGraph source = load_dataset_dir(*cfg.data.source_dir, Domain::kSource);
  AttributedGraph target = load_dataset_dir(*cfg.data.target_dir, Domain::kTarget);
  if (cfg.max_degree > 0) {
    source = cap_degree(source, cfg.max_degree, derive_seed(cfg.seeds.front(), "cap/source"));
    target = cap_degree(target, cfg.max_degree, derive_seed(cfg.seeds.front(), "cap/target"));
  }
  return LoadedPair{std::move(source), std::move(target)};
}

}  // namespace cdgad
