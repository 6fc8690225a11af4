#pragma once

#include "rdpg/common.hpp"
#include "rdpg/graph.hpp"

namespace rdpg {

/// Eigenpairs of a symmetric matrix ordered by decreasing |lambda| (ties:
/// larger signed value first). Each eigenvector column is flipped so that
/// its largest-magnitude entry is positive.
struct SymEigen {
  Vector values;
  Matrix vectors;
};

/// Full spectrum of a symmetric matrix. Rejects input whose asymmetry
/// exceeds 1e-12 (relative to the largest entry, floor 1).
SymEigen eigh_sym(const Matrix& m);

/// The d eigenpairs of largest magnitude, same ordering and sign convention
/// as eigh_sym. One tridiagonal reduction; only d eigenvectors are formed.
SymEigen top_eigenpairs(const Matrix& m, Index d);

/// Adjacency spectral embedding: Xtilde = [u_1..u_d] diag(|lambda_k|^{1/2}).
struct Embedding {
  Matrix Xtilde;
  Vector eigvals;

  Index n() const noexcept { return Xtilde.rows(); }
  Index d() const noexcept { return Xtilde.cols(); }
};

/// Throws ModelError when d is outside [1, n] or |lambda_d| < 1e-10.
Embedding ase(const Graph& g, Index d);
/// Same, from a dense symmetric matrix.
Embedding ase(const Matrix& adjacency, Index d);

/// Orthogonal Procrustes alignment of Xbar onto Xref.
struct Alignment {
  Matrix W;               ///< d x d orthogonal; Xbar * W is closest to Xref
  double residual = 0.0;  ///< ||Xbar W - Xref||_F^2
};

Alignment procrustes(const Matrix& xbar, const Matrix& xref);

/// max_i ||row_i(M)||_2
double two_to_infinity(const Matrix& m);

}  // namespace rdpg
