#pragma once

#include "rdpg/common.hpp"
#include "rdpg/graph.hpp"
#include "rdpg/spectral.hpp"
#include "rdpg/surrogate.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace rdpg {

enum class Prior { kUniformBall };

/// Log prior density up to a constant; -inf outside the open unit ball.
double log_prior(Prior prior, const Vector& x);

struct McmcConfig {
  /// Proposal scale; 0 selects 2.38 / sqrt(d).
  double sigma = 0.0;
  int burn_in = 1000;
  int keep = 200;
  int thin = 5;
  std::uint64_t seed = 0;
  Prior prior = Prior::kUniformBall;
  /// Cap on proposal regenerations for a single step.
  long max_resamples = 1'000'000;

  void validate() const;
  double sigma_for(Index d) const { return sigma > 0.0 ? sigma : 2.38 / std::sqrt(static_cast<double>(d)); }
};

struct Chain {
  Index vertex = 0;
  Matrix draws;  ///< keep x d
  /// Accepted proposals over all burn_in + keep * thin iterations.
  double accept_rate = 0.0;
  long resamples = 0;
};

/// Information matrix used to shape the proposal,
/// (1/n) sum_j xtilde_j xtilde_j^T / (p (1 - p)) with p = ptilde_ij clamped
/// to [tau, 1 - tau] so the matrix stays defined at boundary pairs.
Matrix proposal_information(const VertexContext& ctx);

/// Random-walk Metropolis-Hastings on the surrogate posterior of one
/// vertex. Starts at the embedding row; proposals
/// N(x, sigma^2 G^-1 / n) are regenerated until they fall inside the open
/// unit ball. The stream is seeded from (cfg.seed, vertex).
Chain mh_chain(const VertexContext& ctx, const McmcConfig& cfg);

struct PosteriorSummary {
  Vector mean;
  Matrix cov;  ///< denominator keep
  bool degenerate = false;
};

PosteriorSummary posterior_summary(const Chain& chain);

/// {x : (x - center)^T shape (x - center) <= radius}
struct CredibleSet {
  Vector center;
  Matrix shape;
  double radius = 0.0;
};

/// Throws NumericError when the posterior covariance is singular.
CredibleSet credible_set(const PosteriorSummary& summary, double alpha);
bool contains(const CredibleSet& set, const Vector& x);

struct BayesResult {
  Matrix Xstar;
  std::vector<PosteriorSummary> summaries;
  std::vector<double> accept_rates;
  std::vector<Chain> chains;  ///< filled only when requested
};

struct BayesOptions {
  SurrogateOptions surrogate;
  unsigned threads = 0;
  bool keep_chains = false;
};

/// Independent chains for every vertex; stacks the posterior means.
BayesResult bayes_all(const Graph& g, const Embedding& emb, const McmcConfig& cfg,
                      const BayesOptions& opts = {});

struct Acf {
  std::vector<double> values;  ///< lags 0..max_lag
  bool constant = false;
};

/// Biased autocovariance normalized by lag 0.
Acf acf(const std::vector<double>& series, int max_lag);

double accept_rate(const Chain& chain);

}  // namespace rdpg
