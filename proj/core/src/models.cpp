#include "rdpg/models.hpp"

#include "rdpg/rng.hpp"

namespace rdpg {

SpecKind parse_spec_kind(const std::string& name) {
  if (name == "curve51") return SpecKind::kCurve51;
  if (name == "curve23") return SpecKind::kCurve23;
  if (name == "sbm52") return SpecKind::kSbm52;
  throw ModelError("unknown spec '" + name + "' (expected curve51, curve23 or sbm52)");
}

std::string spec_name(SpecKind kind) {
  switch (kind) {
    case SpecKind::kCurve51: return "curve51";
    case SpecKind::kCurve23: return "curve23";
    case SpecKind::kSbm52: return "sbm52";
  }
  return "unknown";
}

Replicate draw_truth(const ModelSpec& spec, std::uint64_t seed) {
  Replicate rep;
  switch (spec.kind) {
    case SpecKind::kCurve51:
      rep.truth = curve_spec(spec.n, CurveVariant::kSection51);
      break;
    case SpecKind::kCurve23:
      rep.truth = curve_spec(spec.n, CurveVariant::kSection23);
      break;
    case SpecKind::kSbm52: {
      auto draw = sbm52_spec(spec.n, seed);
      rep.truth = std::move(draw.truth);
      rep.labels = std::move(draw.spec.assignment);
      break;
    }
  }
  rep.truth.rho = spec.rho;
  rep.truth.validate();
  return rep;
}

Replicate draw_replicate(const ModelSpec& spec, std::uint64_t seed) {
  Replicate rep = draw_truth(spec, seed);
  rep.graph = sample_rdpg(rep.truth, derive_seed(seed, {0x9a7b}));
  return rep;
}

}  // namespace rdpg
