#include "cdgad/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

namespace cdgad {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

struct TensorRecord {
  std::string name;
  Eigen::Index rows;
  Eigen::Index cols;
};

void append(std::vector<double>& buffer, const Matrix& m) {
  // row-major on disk
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) buffer.push_back(m(i, j));
  }
}

Matrix take(const std::vector<double>& buffer, std::size_t& offset, Eigen::Index rows,
            Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = buffer.at(offset++);
  }
  return m;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& stem, const Checkpoint& ckpt) {
  ckpt.encoder.validate();
  std::filesystem::create_directories(stem.parent_path());

  nlohmann::ordered_json manifest;
  manifest["format"] = "cdgad-checkpoint-v1";
  manifest["stage"] = ckpt.stage;
  manifest["seed"] = ckpt.seed;
  manifest["domain"] = to_string(ckpt.domain);
  manifest["dims"] = ckpt.encoder.dims;
  manifest["has_head"] = ckpt.head.has_value();

  std::vector<double> buffer;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  auto record = [&](const std::string& name, const Matrix& m) {
    nlohmann::ordered_json t;
    t["name"] = name;
    t["rows"] = m.rows();
    t["cols"] = m.cols();
    t["offset"] = buffer.size();
    tensors.push_back(t);
    append(buffer, m);
  };
  for (std::size_t k = 0; k < ckpt.encoder.weights.size(); ++k) {
    record("encoder.W" + std::to_string(k + 1), ckpt.encoder.weights[k]);
  }
  if (ckpt.head) {
    record("head.weight", ckpt.head->weight);
    record("head.bias", ckpt.head->bias);
  }
  manifest["tensors"] = tensors;
  manifest["total_doubles"] = buffer.size();

  {
    std::ofstream out(stem.string() + ".json", std::ios::binary);
    if (!out) throw ParseError("checkpoint: cannot write " + stem.string() + ".json");
    out << manifest.dump(2) << '\n';
  }
  {
    std::ofstream out(stem.string() + ".bin", std::ios::binary);
    if (!out) throw ParseError("checkpoint: cannot write " + stem.string() + ".bin");
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size() * sizeof(double)));
  }
}

bool checkpoint_exists(const std::filesystem::path& stem) {
  return std::filesystem::exists(stem.string() + ".json") &&
         std::filesystem::exists(stem.string() + ".bin");
}

Checkpoint load_checkpoint(const std::filesystem::path& stem) {
  std::ifstream jin(stem.string() + ".json");
  if (!jin) throw ParseError("checkpoint: cannot open " + stem.string() + ".json");
  nlohmann::json manifest;
  try {
    jin >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint manifest: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != "cdgad-checkpoint-v1") {
    throw ParseError("checkpoint: unknown format in " + stem.string() + ".json");
  }

  std::ifstream bin(stem.string() + ".bin", std::ios::binary);
  if (!bin) throw ParseError("checkpoint: cannot open " + stem.string() + ".bin");
  bin.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(bin.tellg());
  bin.seekg(0);
  std::vector<double> buffer(bytes / sizeof(double));
  bin.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(bytes));
  if (buffer.size() != manifest.value("total_doubles", std::size_t{0})) {
    throw ParseError("checkpoint: weight buffer size disagrees with the manifest");
  }

  Checkpoint ckpt;
  ckpt.stage = manifest.value("stage", "");
  ckpt.seed = manifest.value("seed", std::uint64_t{0});
  ckpt.domain = manifest.value("domain", "source") == "target" ? Domain::kTarget
                                                               : Domain::kSource;
  ckpt.encoder.dims = manifest.at("dims").get<std::vector<int>>();

  std::size_t offset = 0;
  for (const auto& t : manifest.at("tensors")) {
    const std::string name = t.at("name").get<std::string>();
    const auto rows = t.at("rows").get<Eigen::Index>();
    const auto cols = t.at("cols").get<Eigen::Index>();
    Matrix m = take(buffer, offset, rows, cols);
    if (name.rfind("encoder.W", 0) == 0) {
      ckpt.encoder.weights.push_back(std::move(m));
    } else if (name == "head.weight") {
      if (!ckpt.head) ckpt.head.emplace();
      ckpt.head->weight = std::move(m);
    } else if (name == "head.bias") {
      if (!ckpt.head) ckpt.head.emplace();
      ckpt.head->bias = std::move(m);
    } else {
      throw ParseError("checkpoint: unknown tensor '" + name + "'");
    }
  }
  ckpt.encoder.validate();
  if (manifest.value("has_head", false) != ckpt.head.has_value()) {
    throw ParseError("checkpoint: manifest head flag disagrees with tensors");
  }
  return ckpt;
}

}  // namespace cdgad
