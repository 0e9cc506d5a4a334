#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "cdgad/encoder.hpp"

namespace cdgad {

// On-disk model checkpoint: <stem>.json carries the manifest (dims, seed,
// stage, tensor table); <stem>.bin is the flat little-endian 64-bit weight
// buffer, row-major, in manifest order. Writing is byte-deterministic.
struct Checkpoint {
  std::string stage;   // "pretrain" | "align" | "refit"
  std::uint64_t seed = 0;
  EncoderParams encoder;
  std::optional<ScoreHeadParams> head;
  Domain domain = Domain::kSource;
};

void save_checkpoint(const std::filesystem::path& stem, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& stem);
bool checkpoint_exists(const std::filesystem::path& stem);

}  // namespace cdgad
