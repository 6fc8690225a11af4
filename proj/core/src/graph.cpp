#include "rdpg/graph.hpp"

#include "rdpg/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace rdpg {

Graph::Graph(Index n, bool hollow)
    : n_(n),
      hollow_(hollow),
      words_per_row_((static_cast<std::size_t>(n) + 63) / 64),
      bits_(static_cast<std::size_t>(n) * words_per_row_, 0) {}

void Graph::set(Index i, Index j) noexcept {
  auto put = [this](Index r, Index c) {
    const auto bit = static_cast<std::size_t>(c);
    bits_[row_offset(r) + bit / 64] |= 1ULL << (bit % 64);
  };
  put(i, j);
  put(j, i);
}

Graph Graph::from_edges(Index n, const std::vector<std::pair<Index, Index>>& edges,
                        bool hollow) {
  if (n < 0) throw ModelError("graph: negative vertex count");
  Graph g(n, hollow);
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw ModelError("graph: edge (" + std::to_string(u) + ", " + std::to_string(v) +
                       ") out of range for n = " + std::to_string(n));
    }
    if (hollow && u == v) continue;
    g.set(u, v);
  }
  return g;
}

Graph Graph::from_dense(const Matrix& adj, bool hollow) {
  if (adj.rows() != adj.cols()) throw ModelError("graph: adjacency matrix must be square");
  const Index n = adj.rows();
  Graph g(n, hollow);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const double a = adj(i, j);
      if (a != adj(j, i)) throw ModelError("graph: adjacency matrix is not symmetric");
      if (a != 0.0 && a != 1.0) throw ModelError("graph: adjacency entries must be 0 or 1");
      if (a == 1.0) {
        if (hollow && i == j) throw ModelError("graph: hollow graph with nonzero diagonal");
        g.set(i, j);
      }
    }
  }
  return g;
}

std::vector<std::uint8_t> Graph::row(Index i) const {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(n_));
  for (Index j = 0; j < n_; ++j) out[static_cast<std::size_t>(j)] = (*this)(i, j) ? 1 : 0;
  return out;
}

Matrix Graph::dense() const {
  Matrix a = Matrix::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i) {
    for (Index j = 0; j < n_; ++j) {
      if ((*this)(i, j)) a(i, j) = 1.0;
    }
  }
  return a;
}

std::vector<std::pair<Index, Index>> Graph::edges() const {
  std::vector<std::pair<Index, Index>> out;
  for (Index i = 0; i < n_; ++i) {
    for (Index j = i; j < n_; ++j) {
      if ((*this)(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

std::size_t Graph::upper_edge_count() const {
  std::size_t total = 0;
  std::size_t diag = 0;
  for (Index i = 0; i < n_; ++i) {
    for (std::size_t w = 0; w < words_per_row_; ++w) {
      total += static_cast<std::size_t>(std::popcount(bits_[row_offset(i) + w]));
    }
    if ((*this)(i, i)) ++diag;
  }
  return (total - diag) / 2 + diag;
}

Index Graph::degree(Index i) const {
  Index deg = 0;
  for (std::size_t w = 0; w < words_per_row_; ++w) {
    deg += std::popcount(bits_[row_offset(i) + w]);
  }
  return deg;
}

void LatentTruth::validate() const {
  if (!(rho > 0.0 && rho <= 1.0)) {
    throw ModelError("latent truth: sparsity factor must lie in (0, 1]");
  }
  if (X0.rows() == 0 || X0.cols() == 0) throw ModelError("latent truth: empty position matrix");
  const Matrix p = rho * (X0 * X0.transpose());
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index j = i; j < p.cols(); ++j) {
      const double v = p(i, j);
      if (!(v > 0.0 && v < 1.0)) {
        std::ostringstream msg;
        msg << "latent truth: edge probability " << v << " for pair (" << i << ", " << j
            << ") outside (0, 1)";
        throw ModelError(msg.str());
      }
    }
  }
  Eigen::JacobiSVD<Matrix> svd(X0);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-12 * std::max(1.0, s(0))) {
    throw ModelError("latent truth: position matrix is not of full column rank");
  }
}

void SbmSpec::validate() const {
  if (B.rows() != B.cols() || B.rows() == 0) throw ModelError("sbm: B must be square and nonempty");
  const Index k = B.rows();
  if (!B.isApprox(B.transpose(), 1e-12)) throw ModelError("sbm: B must be symmetric");
  for (Index r = 0; r < k; ++r) {
    for (Index c = 0; c < k; ++c) {
      if (!(B(r, c) > 0.0 && B(r, c) < 1.0)) throw ModelError("sbm: B entries must lie in (0, 1)");
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(B, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) throw ModelError("sbm: B is not positive semidefinite");
  for (int z : assignment) {
    if (z < 1 || z > k) throw ModelError("sbm: label " + std::to_string(z) + " outside 1..K");
  }
}

Graph sample_rdpg(const LatentTruth& truth, std::uint64_t seed, bool hollow) {
  truth.validate();
  const Index n = truth.n();
  Graph g(n, hollow);
  for (Index i = 0; i < n; ++i) {
    for (Index j = hollow ? i + 1 : i; j < n; ++j) {
      const double p = truth.rho * truth.X0.row(i).dot(truth.X0.row(j));
      if (counter_uniform(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)) < p) {
        g.set(i, j);
      }
    }
  }
  return g;
}

LatentTruth sbm_to_truth(const SbmSpec& spec, Index d) {
  spec.validate();
  const Index k = spec.B.rows();
  if (d < 1 || d > k) throw ModelError("sbm: embedding dimension must lie in 1..K");
  Eigen::SelfAdjointEigenSolver<Matrix> es(spec.B);
  // Eigen sorts ascending; the top-d factor sits in the last d columns.
  const Vector vals = es.eigenvalues().tail(d).reverse();
  if (vals(d - 1) <= 1e-10 * std::max(1.0, vals(0))) {
    throw ModelError("sbm: rank(B) is smaller than the requested dimension " + std::to_string(d));
  }
  const Matrix vecs = es.eigenvectors().rightCols(d).rowwise().reverse();
  const Matrix v = vecs * vals.cwiseSqrt().asDiagonal();

  LatentTruth truth;
  truth.rho = 1.0;
  truth.X0.resize(static_cast<Index>(spec.assignment.size()), d);
  for (std::size_t i = 0; i < spec.assignment.size(); ++i) {
    truth.X0.row(static_cast<Index>(i)) = v.row(spec.assignment[i] - 1);
  }
  return truth;
}

LatentTruth curve_spec(Index n, CurveVariant variant) {
  if (n < 2) throw ModelError("curve: need at least two vertices");
  LatentTruth truth;
  truth.rho = 1.0;
  truth.X0.resize(n, 1);
  for (Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    const double s = std::sin(std::numbers::pi * t);
    truth.X0(i, 0) = variant == CurveVariant::kSection51 ? 0.8 * s + 0.1 : 0.2 + 0.6 * s;
  }
  return truth;
}

SbmDraw sbm52_spec(Index n, std::uint64_t seed) {
  Matrix v(5, 2);
  v << 0.3, 0.3,
       0.5, 0.5,
       0.7, 0.7,
       0.3, 0.7,
       0.7, 0.3;
  SbmDraw out;
  out.spec.B = v * v.transpose();
  out.spec.assignment.resize(static_cast<std::size_t>(n));
  Rng rng(derive_seed(seed, {0x5b3d}));
  for (auto& z : out.spec.assignment) z = 1 + static_cast<int>(rng.index(5));
  // Use the given positions directly rather than an eigen-refactorization so
  // X0 matches the published block positions exactly.
  out.truth.rho = 1.0;
  out.truth.X0.resize(n, 2);
  for (Index i = 0; i < n; ++i) {
    out.truth.X0.row(i) = v.row(out.spec.assignment[static_cast<std::size_t>(i)] - 1);
  }
  return out;
}

}  // namespace rdpg
