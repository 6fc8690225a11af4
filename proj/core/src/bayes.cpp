#include "rdpg/bayes.hpp"

#include "rdpg/parallel.hpp"
#include "rdpg/rng.hpp"
#include "rdpg/stats.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <optional>
#include <string>

namespace rdpg {

double log_prior(Prior prior, const Vector& x) {
  switch (prior) {
    case Prior::kUniformBall:
      return x.squaredNorm() < 1.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

void McmcConfig::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ModelError("mcmc: sigma must be positive (0 selects the default)");
  if (burn_in < 0) throw ModelError("mcmc: burn_in must be nonnegative");
  if (keep < 1) throw ModelError("mcmc: keep must be at least 1");
  if (thin < 1) throw ModelError("mcmc: thin must be at least 1");
  if (max_resamples < 1) throw ModelError("mcmc: max_resamples must be at least 1");
}

Matrix proposal_information(const VertexContext& ctx) {
  const Index d = ctx.d();
  const double lo = ctx.tau();
  const double hi = 1.0 - ctx.tau();
  const auto& xt = ctx.xtilde();
  Matrix info = Matrix::Zero(d, d);
  for (Index j = 0; j < ctx.n(); ++j) {
    const double p = std::clamp(ctx.ptilde()(j), lo, hi);
    info.noalias() += xt.row(j).transpose() * xt.row(j) / (p * (1.0 - p));
  }
  return info / static_cast<double>(ctx.n());
}

Chain mh_chain(const VertexContext& ctx, const McmcConfig& cfg) {
  cfg.validate();
  const Index d = ctx.d();
  const Index i = ctx.vertex();
  const double n = static_cast<double>(ctx.n());

  const Matrix info = proposal_information(ctx);
  const Eigen::LLT<Matrix> info_llt(info);
  if (info_llt.info() != Eigen::Success) {
    throw NumericError("mcmc: proposal information is not positive definite for vertex " + std::to_string(i));
  }
  const Matrix cov = info_llt.solve(Matrix::Identity(d, d)) / n;
  const Eigen::LLT<Matrix> cov_llt(cov);
  if (cov_llt.info() != Eigen::Success) {
    throw NumericError("mcmc: proposal covariance is not positive definite for vertex " + std::to_string(i));
  }
  const Matrix scale = cfg.sigma_for(d) * Matrix(cov_llt.matrixL());

  Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(i)}));
  Vector x = ctx.xtilde().row(i).transpose();
  if (!(x.squaredNorm() < 1.0)) x *= (1.0 - 1e-9) / x.norm();
  double ll = surrogate_loglik(ctx, x);
  double lp = log_prior(cfg.prior, x);

  Chain chain;
  chain.vertex = i;
  chain.draws.resize(cfg.keep, d);
  const long total = static_cast<long>(cfg.burn_in) + static_cast<long>(cfg.keep) * cfg.thin;
  long accepted = 0;
  Vector z(d);
  Vector cand(d);
  for (long t = 1; t <= total; ++t) {
    long tries = 0;
    do {
      if (++tries > cfg.max_resamples) {
        throw NumericError("mcmc: more than " + std::to_string(cfg.max_resamples) +
                           " proposals fell outside the unit ball for vertex " + std::to_string(i));
      }
      for (Index k = 0; k < d; ++k) z(k) = rng.normal();
      cand.noalias() = x + scale * z;
    } while (!(cand.squaredNorm() < 1.0));
    chain.resamples += tries - 1;

    const double ll_cand = surrogate_loglik(ctx, cand);
    const double lp_cand = log_prior(cfg.prior, cand);
    if (std::log(rng.uniform_open()) < (ll_cand - ll) + (lp_cand - lp)) {
      x = cand;
      ll = ll_cand;
      lp = lp_cand;
      ++accepted;
    }
    const long post = t - cfg.burn_in;
    if (post > 0 && post % cfg.thin == 0) chain.draws.row(post / cfg.thin - 1) = x.transpose();
  }
  chain.accept_rate = static_cast<double>(accepted) / static_cast<double>(total);
  return chain;
}

PosteriorSummary posterior_summary(const Chain& chain) {
  const Index keep = chain.draws.rows();
  if (keep < 2) throw ModelError("posterior summary: need at least two draws");
  PosteriorSummary s;
  s.mean = chain.draws.colwise().mean().transpose();
  const Matrix centered = chain.draws.rowwise() - s.mean.transpose();
  s.cov = centered.transpose() * centered / static_cast<double>(keep);
  s.cov = 0.5 * (s.cov + s.cov.transpose());
  s.degenerate = centered.cwiseAbs().maxCoeff() == 0.0;
  return s;
}

CredibleSet credible_set(const PosteriorSummary& summary, double alpha) {
  const Index d = summary.cov.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> es(summary.cov);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  if (summary.degenerate || !(es.eigenvalues().minCoeff() > 1e-12 * std::max(top, 1e-300))) {
    throw NumericError("credible set: posterior covariance is singular; run a longer chain");
  }
  CredibleSet set;
  set.center = summary.mean;
  set.shape = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  set.shape = 0.5 * (set.shape + set.shape.transpose());
  set.radius = chi2_quantile(alpha, static_cast<int>(d));
  return set;
}

bool contains(const CredibleSet& set, const Vector& x) {
  const Vector delta = x - set.center;
  return delta.dot(set.shape * delta) <= set.radius;
}

BayesResult bayes_all(const Graph& g, const Embedding& emb, const McmcConfig& cfg, const BayesOptions& opts) {
  cfg.validate();
  const Index n = emb.n();
  if (g.n() != n) throw ModelError("bayes: graph and embedding sizes differ");
  const auto shared = VertexContext::share(emb.Xtilde);

  BayesResult result;
  result.Xstar.resize(n, emb.d());
  result.summaries.resize(static_cast<std::size_t>(n));
  result.accept_rates.resize(static_cast<std::size_t>(n));
  if (opts.keep_chains) result.chains.resize(static_cast<std::size_t>(n));
  std::vector<std::optional<VertexFailure>> failures(static_cast<std::size_t>(n));

  parallel_for(static_cast<std::size_t>(n), opts.threads, [&](std::size_t k) {
    const auto i = static_cast<Index>(k);
    try {
      VertexContext ctx(g, shared, i, opts.surrogate);
      Chain chain = mh_chain(ctx, cfg);
      result.accept_rates[k] = chain.accept_rate;
      if (chain.draws.rows() >= 2) {
        result.summaries[k] = posterior_summary(chain);
      } else {
        result.summaries[k].mean = chain.draws.row(0).transpose();
        result.summaries[k].cov = Matrix::Zero(emb.d(), emb.d());
        result.summaries[k].degenerate = true;
      }
      result.Xstar.row(i) = result.summaries[k].mean.transpose();
      if (opts.keep_chains) result.chains[k] = std::move(chain);
    } catch (const Error& e) {
      failures[k] = VertexFailure{i, e.what()};
    }
  });

  std::vector<VertexFailure> collected;
  for (auto& f : failures) {
    if (f) collected.push_back(std::move(*f));
  }
  if (!collected.empty()) throw VertexErrors(std::move(collected));
  return result;
}

Acf acf(const std::vector<double>& series, int max_lag) {
  const auto len = static_cast<int>(series.size());
  if (max_lag < 0 || len <= max_lag) throw ModelError("acf: series must be longer than max_lag");
  Acf out;
  out.values.assign(static_cast<std::size_t>(max_lag) + 1, 0.0);
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= len;
  auto autocov = [&](int lag) {
    double s = 0.0;
    for (int t = 0; t + lag < len; ++t) s += (series[t] - mean) * (series[t + lag] - mean);
    return s / len;
  };
  out.values[0] = 1.0;
  const bool flat = std::all_of(series.begin(), series.end(), [&](double v) { return v == series.front(); });
  const double c0 = autocov(0);
  if (flat || c0 == 0.0) {
    out.constant = true;
    return out;
  }
  for (int k = 1; k <= max_lag; ++k) out.values[static_cast<std::size_t>(k)] = autocov(k) / c0;
  return out;
}

double accept_rate(const Chain& chain) { return chain.accept_rate; }

}  // namespace rdpg
