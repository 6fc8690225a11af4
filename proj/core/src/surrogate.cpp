#include "rdpg/surrogate.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace rdpg {
namespace {

struct TermDerivatives {
  double value;
  double d1;
  double d2;
};

// m(u) and its derivatives with the log branch.
TermDerivatives log_branch(double p, int a, double u) {
  const double q = 1.0 - u;
  TermDerivatives t{};
  t.value = a * u / p + u - u * u / (2.0 * p) + (a ? 0.0 : std::log(q));
  t.d1 = a / p + 1.0 - u / p - (a ? 0.0 : 1.0 / q);
  t.d2 = -1.0 / p - (a ? 0.0 : 1.0 / (q * q));
  return t;
}

[[noreturn]] void domain_failure(Index i, Index j, double u) {
  std::ostringstream msg;
  msg << "surrogate: 1 - <x, xtilde_" << j << "> = " << 1.0 - u << " is not positive for vertex " << i
      << " (enable smooth concatenation)";
  throw DomainError(msg.str());
}

}  // namespace

ConcatCoeffs concat_coeffs(double p, int a, double tau) {
  const double u0 = 1.0 - tau;
  const TermDerivatives m = log_branch(p, a, u0);
  ConcatCoeffs c;
  c.alpha = m.d2 / 2.0;
  c.beta = m.d1 - m.d2 * u0;
  c.gamma = m.value - m.d1 * u0 + m.d2 * u0 * u0 / 2.0;
  return c;
}

VertexContext::VertexContext(const Graph& g, std::shared_ptr<const RowMatrix> xtilde, Index i,
                             SurrogateOptions opts)
    : i_(i), a_row_(g.row(i)), xtilde_(std::move(xtilde)), opts_(opts) {
  if (g.n() != xtilde_->rows()) throw ModelError("vertex context: graph and embedding sizes differ");
  init();
}

VertexContext::VertexContext(std::vector<std::uint8_t> a_row, std::shared_ptr<const RowMatrix> xtilde,
                             Index i, SurrogateOptions opts)
    : i_(i), a_row_(std::move(a_row)), xtilde_(std::move(xtilde)), opts_(opts) {
  if (static_cast<Index>(a_row_.size()) != xtilde_->rows()) {
    throw ModelError("vertex context: adjacency row and embedding sizes differ");
  }
  init();
}

std::shared_ptr<const RowMatrix> VertexContext::share(const Matrix& xtilde) {
  return std::make_shared<const RowMatrix>(xtilde);
}

void VertexContext::init() {
  if (i_ < 0 || i_ >= n()) throw ModelError("vertex context: vertex index out of range");
  if (opts_.concat && !(opts_.tau > 0.0 && opts_.tau < 1.0)) {
    throw ModelError("vertex context: concatenation threshold must lie in (0, 1)");
  }
  ptilde_ = (*xtilde_) * xtilde_->row(i_).transpose();
  coeffs_.resize(static_cast<std::size_t>(n()));
  a_.resize(n());
  for (Index j = 0; j < n(); ++j) a_(j) = a_row_[static_cast<std::size_t>(j)];
  inv_p_ = ptilde_.array().inverse();
  boundary_ = opts_.concat ? opts_.tau : std::numeric_limits<double>::min();
  for (Index j = 0; j < n(); ++j) {
    const double p = ptilde_(j);
    if (p == 0.0 || !std::isfinite(p)) {
      throw NumericError("vertex context: ptilde_" + std::to_string(i_) + "," + std::to_string(j) +
                         " is zero or non-finite");
    }
    if (opts_.concat && a_row_[static_cast<std::size_t>(j)] == 0) {
      coeffs_[static_cast<std::size_t>(j)] = concat_coeffs(p, 0, opts_.tau);
    }
  }
}

bool VertexContext::quadratic_branch(Index j, double u) const {
  // For a_j = 1 the term is already quadratic, so only a_j = 0 switches.
  return opts_.concat && a_row_[static_cast<std::size_t>(j)] == 0 && 1.0 - u < opts_.tau;
}

double VertexContext::term(Index j, double u) const {
  if (quadratic_branch(j, u)) {
    const auto& c = coeffs_[static_cast<std::size_t>(j)];
    return (c.alpha * u + c.beta) * u + c.gamma;
  }
  const int a = a_row_[static_cast<std::size_t>(j)];
  if (!a && !(u < 1.0)) domain_failure(i_, j, u);
  return log_branch(ptilde_(j), a, u).value;
}

double VertexContext::term_d1(Index j, double u) const {
  if (quadratic_branch(j, u)) {
    const auto& c = coeffs_[static_cast<std::size_t>(j)];
    return 2.0 * c.alpha * u + c.beta;
  }
  const int a = a_row_[static_cast<std::size_t>(j)];
  if (!a && !(u < 1.0)) domain_failure(i_, j, u);
  const double p = ptilde_(j);
  return a / p + 1.0 - u / p - (a ? 0.0 : 1.0 / (1.0 - u));
}

double VertexContext::term_d2(Index j, double u) const {
  if (quadratic_branch(j, u)) return 2.0 * coeffs_[static_cast<std::size_t>(j)].alpha;
  const int a = a_row_[static_cast<std::size_t>(j)];
  if (!a && !(u < 1.0)) domain_failure(i_, j, u);
  const double q = 1.0 - u;
  return -1.0 / ptilde_(j) - (a ? 0.0 : 1.0 / (q * q));
}

double surrogate_loglik(const VertexContext& ctx, const Vector& x) {
  const Vector u = ctx.xtilde() * x;
  double total = 0.0;
  for (Index j = 0; j < ctx.n(); ++j) total += ctx.term_fast(j, u(j));
  return total;
}

double surrogate_loglik_delta(const VertexContext& ctx, const Vector& x, const Vector& x_new) {
  const Vector u = ctx.xtilde() * x;
  const Vector delta = ctx.xtilde() * (x_new - x);
  const auto& a = ctx.a_values();
  const auto& ip = ctx.inv_ptilde();
  double total = 0.0;
  for (Index j = 0; j < ctx.n(); ++j) {
    const double uj = u(j);
    const double dj = delta(j);
    const double q = 1.0 - uj;
    const double q_new = q - dj;
    // a_j = 1 terms are quadratic everywhere; a_j = 0 terms only on the
    // log branch.
    if (a(j) == 0.0 && !(q >= ctx.boundary() && q_new >= ctx.boundary())) {
      total += ctx.term(j, uj + dj) - ctx.term(j, uj);
      continue;
    }
    // u'^2 - u^2 = d (2u + d) and log(1 - u') - log(1 - u) = log1p(-d / (1 - u))
    total += dj * (a(j) * ip(j) + 1.0 - 0.5 * (2.0 * uj + dj) * ip(j));
    if (a(j) == 0.0) total += std::log1p(-dj / q);
  }
  return total;
}

Vector surrogate_grad(const VertexContext& ctx, const Vector& x) {
  const Vector u = ctx.xtilde() * x;
  Vector w(ctx.n());
  for (Index j = 0; j < ctx.n(); ++j) w(j) = ctx.term_d1_fast(j, u(j));
  return ctx.xtilde().transpose() * w;
}

Matrix surrogate_hess(const VertexContext& ctx, const Vector& x) {
  const Vector u = ctx.xtilde() * x;
  Vector w(ctx.n());
  for (Index j = 0; j < ctx.n(); ++j) w(j) = ctx.term_d2(j, u(j));
  const Matrix h = ctx.xtilde().transpose() * w.asDiagonal() * ctx.xtilde();
  return 0.5 * (h + h.transpose());
}

Vector batch_gradient(const VertexContext& ctx, const Vector& x, std::span<const Index> batch) {
  Vector g = Vector::Zero(ctx.d());
  const auto& xt = ctx.xtilde();
  if (ctx.d() == 1) {
    const double x0 = x(0);
    const double* col = xt.data();
    double acc = 0.0;
    for (Index j : batch) {
      const double v = col[j];
      acc += ctx.term_d1_fast(j, x0 * v) * v;
    }
    g(0) = acc;
  } else {
    for (Index j : batch) g.noalias() += ctx.term_d1_fast(j, ctx.inner(j, x)) * xt.row(j).transpose();
  }
  return g / static_cast<double>(batch.size());
}

double oracle_loglik(Index i, const Vector& x, const LatentTruth& truth, const Graph& g) {
  const Index n = truth.n();
  if (g.n() != n) throw ModelError("oracle log-likelihood: graph and truth sizes differ");
  double total = 0.0;
  for (Index j = 0; j < n; ++j) {
    const double p = j == i ? truth.rho * x.dot(x) : truth.rho * x.dot(truth.X0.row(j).transpose());
    if (!(p > 0.0 && p < 1.0)) {
      std::ostringstream msg;
      msg << "oracle log-likelihood: probability " << p << " for pair (" << i << ", " << j
          << ") outside (0, 1)";
      throw DomainError(msg.str());
    }
    total += g(i, j) ? std::log(p) : std::log1p(-p);
  }
  return total;
}

Vector oracle_mle(Index i, const LatentTruth& truth, const Graph& g, double tol) {
  const Index n = truth.n();
  const Index d = truth.d();
  auto feasible = [&](const Vector& x) {
    for (Index j = 0; j < n; ++j) {
      const double p = j == i ? truth.rho * x.dot(x) : truth.rho * x.dot(truth.X0.row(j).transpose());
      if (!(p > 0.0 && p < 1.0)) return false;
    }
    return true;
  };
  Vector x = truth.X0.row(i).transpose();
  double f = oracle_loglik(i, x, truth, g);
  for (int iter = 0; iter < 200; ++iter) {
    Vector grad = Vector::Zero(d);
    Matrix hess = Matrix::Zero(d, d);
    for (Index j = 0; j < n; ++j) {
      const bool self = j == i;
      const Vector v = self ? x : Vector(truth.X0.row(j).transpose());
      const double p = truth.rho * x.dot(v);
      const double a = g(i, j) ? 1.0 : 0.0;
      // d/dx log-likelihood of one pair; the diagonal term depends on x twice.
      const Vector dp = truth.rho * (self ? Vector(2.0 * x) : v);
      const double s1 = a / p - (1.0 - a) / (1.0 - p);
      const double s2 = -a / (p * p) - (1.0 - a) / ((1.0 - p) * (1.0 - p));
      grad += s1 * dp;
      hess += s2 * dp * dp.transpose();
      if (self) hess += s1 * 2.0 * truth.rho * Matrix::Identity(d, d);
    }
    if (grad.norm() <= tol) break;
    Vector step = -hess.ldlt().solve(grad);
    if (!step.allFinite() || grad.dot(step) <= 0.0) step = grad;  // fall back to ascent
    double t = 1.0;
    bool moved = false;
    for (int h = 0; h < 60; ++h, t *= 0.5) {
      const Vector cand = x + t * step;
      if (!feasible(cand)) continue;
      const double fc = oracle_loglik(i, cand, truth, g);
      if (fc >= f) {
        x = cand;
        f = fc;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return x;
}

double ose_objective(const VertexContext& ctx, const Vector& x) {
  const auto& xt = ctx.xtilde();
  const Vector delta = x - xt.row(ctx.vertex()).transpose();
  double total = 0.0;
  for (Index j = 0; j < ctx.n(); ++j) {
    const double p = ctx.ptilde()(j);
    if (!(p > 0.0 && p < 1.0)) {
      throw DomainError("one-step objective: ptilde_" + std::to_string(ctx.vertex()) + "," +
                        std::to_string(j) + " outside (0, 1)");
    }
    const double w = 1.0 / (p * (1.0 - p));
    const double proj = xt.row(j).dot(delta.transpose());
    const double a = ctx.a_row()[static_cast<std::size_t>(j)];
    total += (a - p) * proj * w - 0.5 * proj * proj * w;
  }
  return total;
}

Vector one_step_vertex(const VertexContext& ctx) {
  const Index d = ctx.d();
  const auto& xt = ctx.xtilde();
  Matrix info = Matrix::Zero(d, d);
  Vector score = Vector::Zero(d);
  for (Index j = 0; j < ctx.n(); ++j) {
    const double p = ctx.ptilde()(j);
    const double w = 1.0 / (p * (1.0 - p));
    const double a = ctx.a_row()[static_cast<std::size_t>(j)];
    info.noalias() += w * xt.row(j).transpose() * xt.row(j);
    score.noalias() += (a - p) * w * xt.row(j).transpose();
  }
  // The 1/n factors cancel.
  const Vector step = info.fullPivLu().solve(score);
  return xt.row(ctx.vertex()).transpose() + step;
}

Matrix one_step(const Embedding& emb, const Graph& g, bool strict) {
  const auto shared = VertexContext::share(emb.Xtilde);
  const Index n = emb.n();
  Matrix out(n, emb.d());
  std::vector<VertexFailure> failures;
  for (Index i = 0; i < n; ++i) {
    VertexContext ctx(g, shared, i, SurrogateOptions{.tau = 0.01, .concat = false});
    if (strict) {
      const auto& p = ctx.ptilde();
      Index bad = -1;
      for (Index j = 0; j < n && bad < 0; ++j) {
        if (!(p(j) > 0.0 && p(j) < 1.0)) bad = j;
      }
      if (bad >= 0) {
        std::ostringstream msg;
        msg << "ptilde_" << i << "," << bad << " = " << p(bad) << " outside (0, 1)";
        failures.push_back({i, msg.str()});
        continue;
      }
    }
    const Vector row = one_step_vertex(ctx);
    if (!row.allFinite()) {
      failures.push_back({i, "one-step update is not finite"});
      continue;
    }
    out.row(i) = row.transpose();
  }
  if (!failures.empty()) throw VertexErrors(std::move(failures));
  return out;
}

FisherMatrix fisher_true(const LatentTruth& truth, Index i) {
  const Index n = truth.n();
  const Index d = truth.d();
  FisherMatrix f{Matrix::Zero(d, d)};
  const Vector xi = truth.X0.row(i).transpose();
  for (Index j = 0; j < n; ++j) {
    const Vector xj = truth.X0.row(j).transpose();
    const double ip = xi.dot(xj);
    f.G.noalias() += xj * xj.transpose() / (ip * (1.0 - truth.rho * ip));
  }
  f.G /= static_cast<double>(n);
  return f;
}

FisherMatrix fisher_plugin(const Matrix& xhat, Index i) {
  const Index n = xhat.rows();
  const Index d = xhat.cols();
  FisherMatrix f{Matrix::Zero(d, d)};
  const Vector xi = xhat.row(i).transpose();
  for (Index j = 0; j < n; ++j) {
    const Vector xj = xhat.row(j).transpose();
    const double ip = xi.dot(xj);
    if (!(ip > 0.0 && ip < 1.0)) {
      std::ostringstream msg;
      msg << "plug-in Fisher information: <xhat_" << i << ", xhat_" << j << "> = " << ip
          << " outside (0, 1) at vertex " << i;
      throw DomainError(msg.str());
    }
    f.G.noalias() += xj * xj.transpose() / (ip * (1.0 - ip));
  }
  f.G /= static_cast<double>(n);
  return f;
}

}  // namespace rdpg
