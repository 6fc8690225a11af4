#pragma once

#include "rdpg/common.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace rdpg {

struct LatentTruth;

/// Undirected binary graph stored as a dense bit-packed symmetric adjacency
/// matrix. Immutable once built; safe to share across threads.
class Graph {
 public:
  Graph() = default;

  /// Builds from an undirected edge list. Duplicate edges are idempotent.
  /// When `hollow`, self edges are dropped and the diagonal stays zero.
  static Graph from_edges(Index n, const std::vector<std::pair<Index, Index>>& edges,
                          bool hollow);

  /// Builds from a dense 0/1 matrix; rejects asymmetric or non-binary input.
  static Graph from_dense(const Matrix& adj, bool hollow);

  Index n() const noexcept { return n_; }
  bool hollow() const noexcept { return hollow_; }

  bool operator()(Index i, Index j) const noexcept {
    const auto bit = static_cast<std::size_t>(j);
    return (bits_[row_offset(i) + bit / 64] >> (bit % 64)) & 1ULL;
  }

  /// Row i as 0/1 bytes.
  std::vector<std::uint8_t> row(Index i) const;
  /// Dense double copy of the adjacency matrix.
  Matrix dense() const;
  /// Edges with i <= j (self loops counted once).
  std::vector<std::pair<Index, Index>> edges() const;
  /// Number of entries with i <= j equal to one.
  std::size_t upper_edge_count() const;
  Index degree(Index i) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.hollow_ == b.hollow_ && a.bits_ == b.bits_;
  }

 private:
  friend Graph sample_rdpg(const LatentTruth& truth, std::uint64_t seed, bool hollow);
  Graph(Index n, bool hollow);

  std::size_t row_offset(Index i) const noexcept {
    return static_cast<std::size_t>(i) * words_per_row_;
  }
  void set(Index i, Index j) noexcept;

  Index n_ = 0;
  bool hollow_ = false;
  std::size_t words_per_row_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Ground-truth latent positions X0 (rows are vertices) and sparsity factor.
struct LatentTruth {
  Matrix X0;
  double rho = 1.0;

  Index n() const noexcept { return X0.rows(); }
  Index d() const noexcept { return X0.cols(); }

  /// Throws ModelError unless 0 < rho <= 1, every rho * <x0i, x0j> lies in
  /// (0, 1), and X0 has full column rank.
  void validate() const;
};

/// Stochastic block model: K x K block probability matrix and 1-based
/// community labels in {1..K}.
struct SbmSpec {
  Matrix B;
  std::vector<int> assignment;

  void validate() const;
};

/// Samples A_ij ~ Bernoulli(rho <x0i, x0j>) independently for i <= j and
/// mirrors the lower triangle. Each pair's draw is keyed on (seed, i, j),
/// so the result does not depend on iteration order. With `hollow` the
/// diagonal is left at zero.
Graph sample_rdpg(const LatentTruth& truth, std::uint64_t seed, bool hollow = false);

/// Factors B = V V^T from its top-d eigenpairs and places row V[z_i] at
/// vertex i. Throws ModelError when rank(B) < d.
LatentTruth sbm_to_truth(const SbmSpec& spec, Index d);

enum class CurveVariant {
  kSection51,  ///< x0i = 0.8 sin(pi (i-1)/(n-1)) + 0.1
  kSection23,  ///< x0i = 0.2 + 0.6 sin(pi t_i), t_i equidistant on [0, 1]
};

/// One-dimensional latent curve with rho = 1.
LatentTruth curve_spec(Index n, CurveVariant variant);

/// The five-community, two-dimensional block model used in the block-model
/// simulation: unique positions (0.3,0.3), (0.5,0.5), (0.7,0.7), (0.3,0.7),
/// (0.7,0.3), labels drawn uniformly. Returns labels and the ground truth.
struct SbmDraw {
  SbmSpec spec;
  LatentTruth truth;
};
SbmDraw sbm52_spec(Index n, std::uint64_t seed);

}  // namespace rdpg
