#pragma once

#include "rdpg/surrogate.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace rdpg::testing {

inline VertexContext make_context(const Matrix& xtilde, std::vector<std::uint8_t> a_row, Index i,
                                  SurrogateOptions opts = {}) {
  return VertexContext(std::move(a_row), VertexContext::share(xtilde), i, opts);
}

inline Matrix column(std::initializer_list<double> values) {
  Matrix m(static_cast<Index>(values.size()), 1);
  Index k = 0;
  for (double v : values) m(k++, 0) = v;
  return m;
}

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index k = 0;
  for (double x : values) v(k++) = x;
  return v;
}

/// Scratch file removed on destruction.
class TempFile {
 public:
  explicit TempFile(const std::string& name, const std::string& contents = {})
      : path_(std::filesystem::temp_directory_path() / ("rdpg_test_" + name)) {
    if (!contents.empty()) std::ofstream(path_) << contents;
  }
  ~TempFile() { std::filesystem::remove(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace rdpg::testing
