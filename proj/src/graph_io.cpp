#include "cdgad/graph_io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace cdgad {

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& file, long line,
                             const std::string& what) {
  throw ParseError(file.string() + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_or_throw(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open " + file.string());
  return in;
}

Matrix read_features(const std::filesystem::path& file) {
  std::ifstream in = open_or_throw(file);
  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) parse_fail(file, lineno, "expected a number");
      row.push_back(v);
      p = next;
      while (p < end && (*p == ',' || *p == ' ' || *p == '\t' || *p == '\r')) ++p;
    }
    if (row.empty()) parse_fail(file, lineno, "empty feature row");
    if (width == 0) {
      width = row.size();
    } else if (row.size() != width) {
      parse_fail(file, lineno, "inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(file.string() + ": no feature rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

std::vector<int> read_labels(const std::filesystem::path& file) {
  std::ifstream in = open_or_throw(file);
  std::vector<int> labels;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "0") {
      labels.push_back(0);
    } else if (line == "1") {
      labels.push_back(1);
    } else {
      parse_fail(file, lineno, "label must be 0 or 1, got '" + line + "'");
    }
  }
  return labels;
}

}  // namespace

AttributedGraph load_graph(const std::filesystem::path& edge_file,
                           const std::filesystem::path& feature_file,
                           const std::optional<std::filesystem::path>& label_file,
                           Domain domain) {
  Matrix features = read_features(feature_file);
  const NodeId n = static_cast<NodeId>(features.rows());

  std::ifstream in = open_or_throw(edge_file);
  std::vector<std::vector<NodeId>> adjacency(n);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    long long u = -1, v = -1;
    if (!(ls >> u >> v)) parse_fail(edge_file, lineno, "expected 'u v'");
    std::string rest;
    if (ls >> rest) parse_fail(edge_file, lineno, "trailing content '" + rest + "'");
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw StructuralError(edge_file.string() + ":" + std::to_string(lineno) +
                            ": node id out of range for " + std::to_string(n) + " nodes");
    }
    if (u == v) continue;  // self loops are dropped
    adjacency[static_cast<NodeId>(u)].push_back(static_cast<NodeId>(v));
  }

  std::optional<std::vector<int>> labels;
  if (label_file) {
    labels = read_labels(*label_file);
    if (static_cast<NodeId>(labels->size()) != n) {
      throw StructuralError(label_file->string() + ": " + std::to_string(labels->size()) +
                            " labels for " + std::to_string(n) + " nodes");
    }
  }
  return AttributedGraph(std::move(adjacency), std::move(features), std::move(labels),
                         domain);
}

AttributedGraph load_dataset_dir(const std::filesystem::path& dir, Domain domain) {
  std::optional<std::filesystem::path> labels;
  if (std::filesystem::exists(dir / "labels.txt")) labels = dir / "labels.txt";
  return load_graph(dir / "edges.txt", dir / "features.csv", labels, domain);
}

void write_dataset_dir(const std::filesystem::path& dir, const AttributedGraph& g) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "edges.txt");
    for (NodeId u = 0; u < g.node_count(); ++u) {
      for (NodeId v : g.neighbors(u)) {
        if (u < v) out << u << ' ' << v << '\n';
      }
    }
  }
  {
    std::ofstream out(dir / "features.csv");
    char buf[40];
    const Matrix& x = g.features();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", x(i, j));
        if (j) out << ',';
        out << buf;
      }
      out << '\n';
    }
  }
  if (g.has_labels()) {
    std::ofstream out(dir / "labels.txt");
    for (int y : g.evaluation_labels()) out << y << '\n';
  }
}

}  // namespace cdgad
