#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cdgad/pipeline.hpp"
#include "cdgad/synthetic.hpp"

namespace cdgad {

// Dataset source: either a generator config or a pair of dataset
// directories in the standard layout.
struct DataConfig {
  std::optional<SyntheticPairConfig> generator;
  std::optional<std::filesystem::path> source_dir;
  std::optional<std::filesystem::path> target_dir;
};

// Top-level run configuration, read from JSON. Unknown keys are rejected so
// typos fail fast.
struct RunConfig {
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  DataConfig data;
  int max_degree = 128;  // degree cap applied after loading; 0 disables
  TrainConfig train;

  void validate() const;
};

RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& file);

// The generated pair (or loaded directories) after preprocessing.
struct LoadedPair {
  AttributedGraph source;
  AttributedGraph target;
};
LoadedPair load_pair(const RunConfig& cfg);

}  // namespace cdgad
