#pragma once

#include "rdpg/common.hpp"
#include "rdpg/graph.hpp"
#include "rdpg/spectral.hpp"

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace rdpg {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Coefficients of the quadratic alpha u^2 + beta u + gamma that matches the
/// per-pair term m(u) = a u/p + u - u^2/(2p) + (1-a) log(1-u) in value,
/// slope and curvature at u0 = 1 - tau.
struct ConcatCoeffs {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

ConcatCoeffs concat_coeffs(double p, int a, double tau);

struct SurrogateOptions {
  /// Concatenation threshold: the log branch is used while 1 - u >= tau.
  double tau = 0.01;
  /// When false the log branch is used everywhere and u >= 1 is a
  /// DomainError.
  bool concat = true;
};

/// Everything needed to evaluate the surrogate objective of one vertex:
/// its adjacency row, the shared embedding, cached inner products
/// ptilde_j = <xtilde_i, xtilde_j>, and the concatenation setting.
/// Immutable; cheap to copy (the embedding is shared).
class VertexContext {
 public:
  VertexContext(const Graph& g, std::shared_ptr<const RowMatrix> xtilde, Index i,
                SurrogateOptions opts = {});
  VertexContext(std::vector<std::uint8_t> a_row, std::shared_ptr<const RowMatrix> xtilde, Index i,
                SurrogateOptions opts = {});

  static std::shared_ptr<const RowMatrix> share(const Matrix& xtilde);

  Index vertex() const noexcept { return i_; }
  Index n() const noexcept { return xtilde_->rows(); }
  Index d() const noexcept { return xtilde_->cols(); }
  const RowMatrix& xtilde() const noexcept { return *xtilde_; }
  std::span<const std::uint8_t> a_row() const noexcept { return a_row_; }
  const Vector& ptilde() const noexcept { return ptilde_; }
  double tau() const noexcept { return opts_.tau; }
  bool concat_enabled() const noexcept { return opts_.concat; }

  /// <x, xtilde_j>
  double inner(Index j, const Vector& x) const noexcept {
    return xtilde_->row(j).dot(x.transpose());
  }

  /// Term j of the surrogate as a function of u = <x, xtilde_j>, and its
  /// first and second derivatives in u.
  double term(Index j, double u) const;
  double term_d1(Index j, double u) const;
  double term_d2(Index j, double u) const;

  /// term with the common case inlined (see term_d1_fast).
  double term_fast(Index j, double u) const {
    const auto k = static_cast<std::size_t>(j);
    const double q = 1.0 - u;
    if (!(q >= boundary_)) [[unlikely]] return term(j, u);
    const double ip = inv_p_[k];
    const double poly = u - 0.5 * u * u * ip;
    return a_row_[k] ? poly + u * ip : poly + std::log(q);
  }

  /// term_d1 with the common case inlined: the log branch away from the
  /// boundary. Everything else falls through to term_d1.
  double term_d1_fast(Index j, double u) const {
    const auto k = static_cast<std::size_t>(j);
    const double q = 1.0 - u;
    if (!(q >= boundary_)) [[unlikely]] return term_d1(j, u);
    const double a = a_[k];
    return (a - u) * inv_p_[k] + 1.0 - (1.0 - a) / (q + a * u);
  }

  /// a_j as doubles and 1 / ptilde_j, for bulk evaluation.
  const Eigen::ArrayXd& a_values() const noexcept { return a_; }
  const Eigen::ArrayXd& inv_ptilde() const noexcept { return inv_p_; }
  /// Below this value of 1 - u a term leaves the plain log branch.
  double boundary() const noexcept { return boundary_; }

 private:
  void init();
  bool quadratic_branch(Index j, double u) const;

  Index i_ = 0;
  std::vector<std::uint8_t> a_row_;
  std::shared_ptr<const RowMatrix> xtilde_;
  Vector ptilde_;
  SurrogateOptions opts_;
  std::vector<ConcatCoeffs> coeffs_;  // for a_j = 0 terms only
  Eigen::ArrayXd a_;
  Eigen::ArrayXd inv_p_;
  double boundary_ = 0.0;
};

/// Surrogate log-likelihood summed over all j (including j = i).
double surrogate_loglik(const VertexContext& ctx, const Vector& x);
/// surrogate_loglik(x_new) - surrogate_loglik(x), evaluated term by term
/// so that the result keeps its relative precision when the two points are
/// close.
double surrogate_loglik_delta(const VertexContext& ctx, const Vector& x, const Vector& x_new);

/// Gradient of surrogate_loglik.
Vector surrogate_grad(const VertexContext& ctx, const Vector& x);
/// Hessian of surrogate_loglik.
Matrix surrogate_hess(const VertexContext& ctx, const Vector& x);

/// Average of the per-term gradients over the given indices (with
/// repetition). Over all j this equals surrogate_grad / n.
Vector batch_gradient(const VertexContext& ctx, const Vector& x, std::span<const Index> batch);

/// Oracle log-likelihood of vertex i with every other vertex at its true
/// position. Throws DomainError outside the feasible region.
double oracle_loglik(Index i, const Vector& x, const LatentTruth& truth, const Graph& g);

/// Maximizer of oracle_loglik by damped Newton ascent, started from the
/// true position. Used as a reference point, not as an estimator.
Vector oracle_mle(Index i, const LatentTruth& truth, const Graph& g, double tol = 1e-12);

/// Quadratic objective whose maximizer is the one-step estimate.
double ose_objective(const VertexContext& ctx, const Vector& x);

/// One-step update of row i.
Vector one_step_vertex(const VertexContext& ctx);

/// One-step estimator for every vertex. With `strict`, any vertex with some
/// ptilde_ij outside (0, 1) is reported in a VertexErrors exception; without
/// it the raw formula is applied anyway (rows that come out non-finite are
/// still reported).
Matrix one_step(const Embedding& emb, const Graph& g, bool strict = true);

/// Symmetric positive definite d x d information matrix.
struct FisherMatrix {
  Matrix G;
};

/// (1/n) sum_j x0j x0j^T / (<x0i,x0j> (1 - rho <x0i,x0j>))
FisherMatrix fisher_true(const LatentTruth& truth, Index i);

/// Plug-in version from an estimate. Throws DomainError naming the vertex
/// when some <xhat_i, xhat_j> falls outside (0, 1).
FisherMatrix fisher_plugin(const Matrix& xhat, Index i);

}  // namespace rdpg
