#pragma once

#include "rdpg/common.hpp"
#include "rdpg/graph.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace rdpg {

struct EdgeListOptions {
  /// Vertex count. Inferred as (max index + 1) when absent.
  std::optional<Index> n;
  /// Indices in the file start at 1.
  bool one_indexed = false;
  /// Drop self edges and keep a zero diagonal (real networks). Simulated
  /// graphs written with self loops should be read with hollow = false.
  bool hollow = true;
  /// A leading "# n <count> hollow|self-loops" comment, as written by
  /// write_edge_list, supplies n (unless given) and overrides `hollow`.
  bool use_header = true;
};

/// Reads whitespace-separated "u v" pairs, one per line. Blank lines and
/// lines starting with '#' are skipped; duplicate edges are idempotent.
Graph read_edge_list(const std::filesystem::path& path, const EdgeListOptions& opts = {});

/// Writes one "u v" line per edge with u <= v (0-based), preceded by a
/// comment recording the vertex count.
void write_edge_list(const std::filesystem::path& path, const Graph& g);

/// Headerless comma-separated matrix, row-major, printed with 17
/// significant digits so values round-trip exactly.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

/// One integer label per line.
void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);
std::vector<int> read_labels(const std::filesystem::path& path);

}  // namespace rdpg
