#include "rdpg/common.hpp"

namespace rdpg {
namespace {

std::string describe(const std::vector<VertexFailure>& failures) {
  std::string msg = std::to_string(failures.size()) + " vertex failure(s)";
  const std::size_t shown = std::min<std::size_t>(failures.size(), 5);
  for (std::size_t k = 0; k < shown; ++k) {
    msg += k == 0 ? ": " : "; ";
    msg += "vertex " + std::to_string(failures[k].vertex) + ": " + failures[k].message;
  }
  if (shown < failures.size()) msg += "; ...";
  return msg;
}

}  // namespace

VertexErrors::VertexErrors(std::vector<VertexFailure> failures)
    : Error(describe(failures)), failures_(std::move(failures)) {}

}  // namespace rdpg
