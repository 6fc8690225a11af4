#include "rdpg/graph_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>

namespace rdpg {
namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(std::string_view token, T& value) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const auto start = line.find_first_not_of(" \t\r", pos);
    if (start == std::string_view::npos) break;
    auto stop = line.find_first_of(" \t\r", start);
    if (stop == std::string_view::npos) stop = line.size();
    tokens.push_back(line.substr(start, stop - start));
    pos = stop;
  }
  return tokens;
}

}  // namespace

Graph read_edge_list(const std::filesystem::path& path, const EdgeListOptions& opts) {
  auto in = open_in(path);
  std::vector<std::pair<Index, Index>> edges;
  std::string line;
  std::size_t lineno = 0;
  long long max_index = -1;
  std::optional<Index> n_header;
  bool hollow = opts.hollow;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      // "# n <count> hollow|self-loops", as written by write_edge_list
      const auto tokens = split_ws(body.substr(1));
      long long count = 0;
      if (opts.use_header && edges.empty() && tokens.size() == 3 && tokens[0] == "n" &&
          parse_number(tokens[1], count) && (tokens[2] == "hollow" || tokens[2] == "self-loops")) {
        n_header = static_cast<Index>(count);
        hollow = tokens[2] == "hollow";
      }
      continue;
    }
    const auto tokens = split_ws(body);
    if (tokens.size() != 2) throw FormatError("edge list: expected two vertex indices", lineno);
    long long u = 0;
    long long v = 0;
    if (!parse_number(tokens[0], u) || !parse_number(tokens[1], v) || u < 0 || v < 0) {
      throw FormatError("edge list: indices must be nonnegative integers", lineno);
    }
    if (opts.one_indexed) {
      if (u == 0 || v == 0) throw FormatError("edge list: index 0 in a one-indexed file", lineno);
      --u;
      --v;
    }
    const std::optional<Index> bound = opts.n ? opts.n : n_header;
    if (bound && (u >= *bound || v >= *bound)) {
      throw FormatError("edge list: vertex index out of bounds for n = " + std::to_string(*bound), lineno);
    }
    max_index = std::max({max_index, u, v});
    edges.emplace_back(static_cast<Index>(u), static_cast<Index>(v));
  }
  const Index n = opts.n ? *opts.n : n_header ? *n_header : static_cast<Index>(max_index + 1);
  return Graph::from_edges(n, edges, hollow);
}

void write_edge_list(const std::filesystem::path& path, const Graph& g) {
  auto out = open_out(path);
  out << "# n " << g.n() << (g.hollow() ? " hollow" : " self-loops") << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path);
  char buf[32];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty()) continue;
    Index count = 0;
    std::size_t pos = 0;
    for (;;) {
      auto comma = body.find(',', pos);
      const auto cell = trim(body.substr(pos, comma == std::string_view::npos ? body.npos : comma - pos));
      double v = 0.0;
      if (!parse_number(cell, v)) {
        throw FormatError("matrix csv: cannot parse '" + std::string(cell) + "'", lineno);
      }
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (cols < 0) {
      cols = count;
    } else if (count != cols) {
      throw FormatError("matrix csv: ragged row with " + std::to_string(count) + " columns, expected " +
                            std::to_string(cols),
                        lineno);
    }
    ++rows;
  }
  if (rows == 0) throw FormatError("matrix csv: '" + path.string() + "' contains no rows");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  }
  return m;
}

void write_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  auto out = open_out(path);
  for (int z : labels) out << z << '\n';
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

std::vector<int> read_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    int z = 0;
    if (!parse_number(body, z)) throw FormatError("labels: expected one integer per line", lineno);
    labels.push_back(z);
  }
  if (labels.empty()) throw FormatError("labels: '" + path.string() + "' contains no labels");
  return labels;
}

}  // namespace rdpg
