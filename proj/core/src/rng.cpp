#include "rdpg/rng.hpp"

#include <cmath>

namespace rdpg {
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t k : keys) {
    h = splitmix64(h ^ splitmix64(k + 0x3c6ef372fe94f82bULL));
  }
  return h;
}

double counter_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return bits_to_unit(derive_seed(seed, {a, b}));
}

Rng::Rng(std::uint64_t seed) noexcept {
  std::uint64_t z = seed;
  for (auto& s : s_) {
    z += 0x9e3779b97f4a7c15ULL;
    s = splitmix64(z);
  }
}

double Rng::uniform_open() noexcept {
  for (;;) {
    const double u = uniform();
    if (u > 0.0) return u;
  }
}

double Rng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

}  // namespace rdpg
