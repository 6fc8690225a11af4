#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace rdpg {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a child seed from a parent seed and a sequence of stream keys
/// (vertex index, replicate index, ...). Distinct key paths give
/// statistically independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept;

/// Maps 64 random bits to a double in [0, 1) with 53 bits of precision.
constexpr double bits_to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based uniform draw: the value depends only on (seed, a, b), so
/// sampling order and thread schedule do not matter.
double counter_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept;

/// xoshiro256** generator. Satisfies UniformRandomBitGenerator; the
/// distribution helpers below are implemented here rather than through
/// <random> so draws are identical across standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1).
  double uniform() noexcept { return bits_to_unit((*this)()); }
  /// Uniform on (0, 1); never returns 0, so log() is always finite.
  double uniform_open() noexcept;
  /// Uniform integer on [0, n), unbiased (Lemire's method).
  std::uint64_t index(std::uint64_t n) noexcept {
    __extension__ using u128 = unsigned __int128;
    u128 m = static_cast<u128>((*this)()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) [[unlikely]] {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<u128>((*this)()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }
  /// Uniform integer on [0, n) for n < 2^32, unbiased (Lemire's method on
  /// 32-bit halves; each 64-bit output serves two draws).
  std::uint32_t index32(std::uint32_t n) noexcept {
    std::uint64_t m = static_cast<std::uint64_t>(next32()) * n;
    auto low = static_cast<std::uint32_t>(m);
    if (low < n) [[unlikely]] {
      const std::uint32_t threshold = (0u - n) % n;
      while (low < threshold) {
        m = static_cast<std::uint64_t>(next32()) * n;
        low = static_cast<std::uint32_t>(m);
      }
    }
    return static_cast<std::uint32_t>(m >> 32);
  }

  /// Standard normal via the Marsaglia polar method.
  double normal() noexcept;

 private:
  std::uint32_t next32() noexcept {
    if (has_half_) {
      has_half_ = false;
      return half_;
    }
    const std::uint64_t r = (*this)();
    half_ = static_cast<std::uint32_t>(r >> 32);
    has_half_ = true;
    return static_cast<std::uint32_t>(r);
  }

  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
  std::uint32_t half_ = 0;
  bool has_half_ = false;
};

}  // namespace rdpg
