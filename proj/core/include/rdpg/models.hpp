#pragma once

#include "rdpg/common.hpp"
#include "rdpg/graph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rdpg {

enum class SpecKind { kCurve51, kCurve23, kSbm52 };

/// Parses "curve51", "curve23" or "sbm52"; throws ModelError otherwise.
SpecKind parse_spec_kind(const std::string& name);
std::string spec_name(SpecKind kind);

/// A simulation design: which latent configuration, how many vertices and
/// the sparsity factor applied when sampling.
struct ModelSpec {
  SpecKind kind = SpecKind::kCurve51;
  Index n = 1000;
  double rho = 1.0;

  Index dim() const noexcept { return kind == SpecKind::kSbm52 ? 2 : 1; }
};

/// One simulated data set. Labels are empty for the curve designs.
struct Replicate {
  LatentTruth truth;
  std::vector<int> labels;
  Graph graph;
};

/// Truth (and labels) for the given seed; block labels are redrawn per
/// seed, the curve designs do not depend on it.
Replicate draw_truth(const ModelSpec& spec, std::uint64_t seed);

/// draw_truth followed by sample_rdpg with the diagonal drawn too.
Replicate draw_replicate(const ModelSpec& spec, std::uint64_t seed);

}  // namespace rdpg
