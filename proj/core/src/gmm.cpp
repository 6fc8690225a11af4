#include "rdpg/gmm.hpp"

#include "rdpg/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

namespace rdpg {
namespace {

struct Fit {
  Matrix means;
  std::vector<Matrix> covs;
  Vector weights;
  Matrix resp;
  double loglik = -std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  int iterations = 0;
  bool empty_component = false;
};

Matrix kmeanspp(const Matrix& X, int K, Rng& rng) {
  const Index n = X.rows();
  Matrix centers(K, X.cols());
  centers.row(0) = X.row(static_cast<Index>(rng.index(static_cast<std::uint64_t>(n))));
  Vector dist = (X.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int k = 1; k < K; ++k) {
    const double total = dist.sum();
    Index pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (pick = 0; pick < n - 1; ++pick) {
        target -= dist(pick);
        if (target < 0.0) break;
      }
    } else {
      pick = static_cast<Index>(rng.index(static_cast<std::uint64_t>(n)));
    }
    centers.row(k) = X.row(pick);
    dist = dist.cwiseMin((X.rowwise() - centers.row(k)).rowwise().squaredNorm());
  }
  return centers;
}

// Fills log(w_k) + log N(x_i | mu_k, S_k) into logp and returns the total
// log-likelihood; resp receives normalized responsibilities.
double e_step(const Matrix& X, const Fit& fit, Matrix& resp) {
  const Index n = X.rows();
  const Index d = X.cols();
  const auto K = static_cast<Index>(fit.covs.size());
  Matrix logp(n, K);
  for (Index k = 0; k < K; ++k) {
    Eigen::LLT<Matrix> llt(fit.covs[static_cast<std::size_t>(k)]);
    const Matrix L = llt.matrixL();
    const double logdet = 2.0 * L.diagonal().array().log().sum();
    const Matrix centered = (X.rowwise() - fit.means.row(k)).transpose();
    const Matrix solved = L.triangularView<Eigen::Lower>().solve(centered);
    const Vector maha = solved.colwise().squaredNorm().transpose();
    const double c = std::log(fit.weights(k)) - 0.5 * (d * std::log(2.0 * std::numbers::pi) + logdet);
    logp.col(k) = (c - 0.5 * maha.array()).matrix();
  }
  double total = 0.0;
  resp.resize(n, K);
  for (Index i = 0; i < n; ++i) {
    const double m = logp.row(i).maxCoeff();
    const double s = (logp.row(i).array() - m).exp().sum();
    const double lse = m + std::log(s);
    total += lse;
    resp.row(i) = (logp.row(i).array() - lse).exp().matrix();
  }
  return total;
}

Fit run_em(const Matrix& X, int K, const GmmConfig& cfg, Rng& rng) {
  const Index n = X.rows();
  const Index d = X.cols();
  Fit fit;
  fit.means = kmeanspp(X, K, rng);
  // Start from hard assignment to the nearest seed.
  Matrix resp = Matrix::Zero(n, K);
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    (fit.means.rowwise() - X.row(i)).rowwise().squaredNorm().minCoeff(&best);
    resp(i, best) = 1.0;
  }
  std::vector<bool> reseeded(static_cast<std::size_t>(K), false);
  const Matrix global_cov = [&] {
    const Matrix c = X.rowwise() - X.colwise().mean();
    return Matrix(c.transpose() * c / static_cast<double>(n));
  }();

  fit.covs.assign(static_cast<std::size_t>(K), Matrix());
  fit.weights.resize(K);
  double prev = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // M-step
    for (Index k = 0; k < K; ++k) {
      double nk = resp.col(k).sum();
      if (nk < 1e-8) {
        const auto ku = static_cast<std::size_t>(k);
        if (reseeded[ku]) {
          fit.empty_component = true;
        } else {
          reseeded[ku] = true;
        }
        const auto pick = static_cast<Index>(rng.index(static_cast<std::uint64_t>(n)));
        fit.means.row(k) = X.row(pick);
        fit.covs[ku] = global_cov + cfg.reg * Matrix::Identity(d, d);
        fit.weights(k) = 1.0 / static_cast<double>(n);
        continue;
      }
      fit.weights(k) = nk / static_cast<double>(n);
      fit.means.row(k) = (resp.col(k).transpose() * X) / nk;
      const Matrix centered = X.rowwise() - fit.means.row(k);
      Matrix cov = centered.transpose() * resp.col(k).asDiagonal() * centered / nk;
      cov = 0.5 * (cov + cov.transpose());
      fit.covs[static_cast<std::size_t>(k)] = cov + cfg.reg * Matrix::Identity(d, d);
    }
    fit.weights /= fit.weights.sum();
    const double ll = e_step(X, fit, resp);
    fit.trace.push_back(ll);
    fit.iterations = iter + 1;
    fit.loglik = ll;
    if (std::isfinite(prev) && ll - prev <= cfg.tol * std::abs(ll)) break;
    prev = ll;
  }
  fit.resp = std::move(resp);
  return fit;
}

}  // namespace

GmmResult gmm_em(const Matrix& X, int K, const GmmConfig& cfg) {
  const Index n = X.rows();
  if (K < 1) throw ModelError("gmm: K must be at least 1");
  if (n < K) throw ModelError("gmm: need at least K points");
  if (cfg.restarts < 1 || cfg.max_iters < 1) throw ModelError("gmm: restarts and max_iters must be positive");
  if (!X.allFinite()) throw NumericError("gmm: input contains non-finite values");

  Fit best;
  for (int r = 0; r < cfg.restarts; ++r) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(r)}));
    Fit fit = run_em(X, K, cfg, rng);
    if (fit.loglik > best.loglik || best.trace.empty()) best = std::move(fit);
  }

  GmmResult out;
  out.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Index k = 0;
    best.resp.row(i).maxCoeff(&k);
    out.labels[static_cast<std::size_t>(i)] = static_cast<int>(k);
  }
  out.means = std::move(best.means);
  out.covs = std::move(best.covs);
  out.weights = std::move(best.weights);
  out.loglik = best.loglik;
  out.trace = std::move(best.trace);
  out.iterations = best.iterations;
  out.empty_component = best.empty_component;
  return out;
}

double rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ModelError("rand index: partitions have different lengths");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  // Pair counts from the contingency table.
  auto pairs = [](double c) { return c * (c - 1.0) / 2.0; };
  std::unordered_map<long long, double> joint;
  std::unordered_map<int, double> ca;
  std::unordered_map<int, double> cb;
  for (std::size_t i = 0; i < n; ++i) {
    joint[(static_cast<long long>(a[i]) << 32) ^ static_cast<unsigned>(b[i])] += 1.0;
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
  }
  double same_both = 0.0;
  for (const auto& [key, c] : joint) same_both += pairs(c);
  double same_a = 0.0;
  for (const auto& [key, c] : ca) same_a += pairs(c);
  double same_b = 0.0;
  for (const auto& [key, c] : cb) same_b += pairs(c);
  const double total = pairs(static_cast<double>(n));
  const double agree = total - same_a - same_b + 2.0 * same_both;
  return agree / total;
}

}  // namespace rdpg
