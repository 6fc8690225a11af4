#include "rdpg/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace rdpg {
namespace {

void check_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) throw ModelError("eigh: matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ModelError("eigh: matrix is not symmetric");
  }
}

// Indices into an ascending spectrum, reordered by decreasing magnitude.
std::vector<Index> magnitude_order(const Vector& ascending) {
  std::vector<Index> idx(static_cast<std::size_t>(ascending.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    const double ma = std::abs(ascending(a));
    const double mb = std::abs(ascending(b));
    if (ma != mb) return ma > mb;
    return ascending(a) > ascending(b);
  });
  return idx;
}

void fix_signs(Matrix& vectors) {
  for (Index c = 0; c < vectors.cols(); ++c) {
    Index arg = 0;
    vectors.col(c).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, c) < 0.0) vectors.col(c) *= -1.0;
  }
}

void check_info(lapack_int info, const char* routine) {
  if (info != 0) {
    throw NumericError(std::string("eigh: LAPACK ") + routine + " failed with info " +
                       std::to_string(info));
  }
}

}  // namespace

SymEigen eigh_sym(const Matrix& m) {
  check_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw NumericError("eigh: eigensolver did not converge");
  const auto order = magnitude_order(es.eigenvalues());
  SymEigen out;
  out.values.resize(m.rows());
  out.vectors.resize(m.rows(), m.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.values(static_cast<Index>(k)) = es.eigenvalues()(order[k]);
    out.vectors.col(static_cast<Index>(k)) = es.eigenvectors().col(order[k]);
  }
  fix_signs(out.vectors);
  return out;
}

SymEigen top_eigenpairs(const Matrix& m, Index d) {
  check_symmetric(m);
  const Index n = m.rows();
  if (d < 1 || d > n) throw ModelError("eigh: requested " + std::to_string(d) + " eigenpairs of an order-" + std::to_string(n) + " matrix");
  const auto ln = static_cast<lapack_int>(n);

  // Householder reduction to tridiagonal form, A = Q T Q^T.
  Matrix a = m;
  Vector diag(n), offdiag(std::max<Index>(n - 1, 1)), tau(std::max<Index>(n - 1, 1));
  check_info(LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', ln, a.data(), ln, diag.data(), offdiag.data(),
                            tau.data()),
             "dsytrd");

  // All eigenvalues of T (ascending), O(n^2).
  Vector values = diag;
  {
    Vector e = offdiag;
    check_info(LAPACKE_dsterf(ln, values.data(), e.data()), "dsterf");
  }
  // The top-d set by magnitude is a prefix (most negative) plus a suffix
  // (most positive) of the ascending spectrum.
  const auto order = magnitude_order(values);
  Index n_low = 0;
  for (Index k = 0; k < d; ++k) {
    if (values(order[static_cast<std::size_t>(k)]) < 0.0) ++n_low;
  }
  const Index n_high = d - n_low;

  Matrix z(n, d);
  Vector w(d);
  auto tridiagonal_vectors = [&](Index il, Index iu, Index col) {
    // dstemr overwrites its tridiagonal arguments; work on copies.
    Vector dd = diag;
    Vector ee(n);
    ee.head(n - 1) = offdiag.head(n - 1);
    ee(n - 1) = 0.0;
    lapack_int found = 0;
    lapack_logical tryrac = 1;
    // dstemr uses all n entries of its eigenvalue array as workspace.
    Vector found_values(n);
    std::vector<lapack_int> isuppz(static_cast<std::size_t>(2 * (iu - il + 1)));
    check_info(LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', ln, dd.data(), ee.data(), 0.0, 0.0,
                              static_cast<lapack_int>(il + 1), static_cast<lapack_int>(iu + 1),
                              &found, found_values.data(), z.data() + col * n, ln,
                              static_cast<lapack_int>(iu - il + 1), isuppz.data(), &tryrac),
               "dstemr");
    w.segment(col, iu - il + 1) = found_values.head(iu - il + 1);
  };
  if (n_low > 0) tridiagonal_vectors(0, n_low - 1, 0);
  if (n_high > 0) tridiagonal_vectors(n - n_high, n - 1, n_low);

  // Back-transform: eigenvectors of A are Q times eigenvectors of T.
  if (n > 1) {
    check_info(LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', ln, static_cast<lapack_int>(d),
                              a.data(), ln, tau.data(), z.data(), ln),
               "dormtr");
  }

  const auto final_order = magnitude_order(w.head(d));
  SymEigen out;
  out.values.resize(d);
  out.vectors.resize(n, d);
  for (Index k = 0; k < d; ++k) {
    const Index src = final_order[static_cast<std::size_t>(k)];
    out.values(k) = w(src);
    out.vectors.col(k) = z.col(src);
  }
  fix_signs(out.vectors);
  return out;
}

Embedding ase(const Matrix& adjacency, Index d) {
  const Index n = adjacency.rows();
  if (d < 1 || d > n) throw ModelError("ase: embedding dimension must lie in [1, n]");
  SymEigen eig = top_eigenpairs(adjacency, d);
  if (std::abs(eig.values(d - 1)) < 1e-10) {
    throw ModelError("ase: |lambda_" + std::to_string(d) + "| is numerically zero; reduce d");
  }
  Embedding emb;
  emb.eigvals = eig.values;
  emb.Xtilde = eig.vectors * eig.values.cwiseAbs().cwiseSqrt().asDiagonal();
  return emb;
}

Embedding ase(const Graph& g, Index d) { return ase(g.dense(), d); }

Alignment procrustes(const Matrix& xbar, const Matrix& xref) {
  if (xbar.rows() != xref.rows() || xbar.cols() != xref.cols()) {
    throw ModelError("procrustes: shape mismatch");
  }
  const Matrix cross = xbar.transpose() * xref;
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Alignment out;
  out.W = svd.matrixU() * svd.matrixV().transpose();
  out.residual = (xbar * out.W - xref).squaredNorm();
  return out;
}

double two_to_infinity(const Matrix& m) { return m.rowwise().norm().maxCoeff(); }

}  // namespace rdpg
