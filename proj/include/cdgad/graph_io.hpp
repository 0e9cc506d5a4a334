#pragma once

#include <filesystem>
#include <optional>

#include "cdgad/graph.hpp"

namespace cdgad {

// Loads a graph from the plain-text dataset layout:
//   edge file:    one "u v" pair of zero-based node ids per line
//   feature file: CSV, row i = features of node i, no header
//   label file:   optional, one 0/1 per line, row i = node i
// Duplicate edges are collapsed and the edge set symmetrized. Node count is
// defined by the feature file; an edge naming a node beyond it is an error.
AttributedGraph load_graph(const std::filesystem::path& edge_file,
                           const std::filesystem::path& feature_file,
                           const std::optional<std::filesystem::path>& label_file,
                           Domain domain = Domain::kSource);

// Convenience for the directory layout the generator emits
// (edges.txt / features.csv / labels.txt).
AttributedGraph load_dataset_dir(const std::filesystem::path& dir, Domain domain);

// Writes the same three files. Doubles round-trip exactly.
void write_dataset_dir(const std::filesystem::path& dir, const AttributedGraph& g);

}  // namespace cdgad
