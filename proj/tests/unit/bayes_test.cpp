#include "helpers.hpp"
#include "rdpg/bayes.hpp"
#include "rdpg/rng.hpp"

#include <doctest.h>

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <vector>

using namespace rdpg;
using rdpg::testing::column;
using rdpg::testing::make_context;
using rdpg::testing::vec;

namespace {

struct Fixture {
  Graph g;
  Embedding e;
  std::shared_ptr<const RowMatrix> shared;
};

Fixture curve_fixture(Index n, std::uint64_t seed) {
  Fixture f;
  f.g = sample_rdpg(curve_spec(n, CurveVariant::kSection51), seed);
  f.e = ase(f.g, 1);
  f.shared = VertexContext::share(f.e.Xtilde);
  return f;
}

}  // namespace

TEST_CASE("vanishing proposal scale gives a constant chain") {
  const Fixture f = curve_fixture(100, 1);
  const VertexContext ctx(f.g, f.shared, 10);
  McmcConfig cfg;
  cfg.sigma = 1e-300;
  cfg.burn_in = 50;
  cfg.keep = 20;
  cfg.thin = 2;
  const Chain c = mh_chain(ctx, cfg);
  CHECK(c.accept_rate == 1.0);
  CHECK(accept_rate(c) == 1.0);
  for (Index k = 0; k < c.draws.rows(); ++k) CHECK(c.draws(k, 0) == f.e.Xtilde(10, 0));
  const PosteriorSummary s = posterior_summary(c);
  CHECK(s.degenerate);
  CHECK(s.cov(0, 0) == 0.0);
  CHECK_THROWS_AS(credible_set(s, 0.05), NumericError);
}

TEST_CASE("draws stay strictly inside the unit ball") {
  const SbmDraw draw = sbm52_spec(200, 4);
  const Graph g = sample_rdpg(draw.truth, 4);
  const Embedding e = ase(g, 2);
  const auto shared = VertexContext::share(e.Xtilde);
  McmcConfig cfg;
  cfg.burn_in = 200;
  cfg.keep = 100;
  cfg.sigma = 5.0;
  for (Index i = 0; i < 200; i += 29) {
    const Chain c = mh_chain(VertexContext(g, shared, i), cfg);
    for (Index k = 0; k < c.draws.rows(); ++k) CHECK(c.draws.row(k).squaredNorm() < 1.0);
    CHECK(c.accept_rate > 0.0);
    CHECK(c.accept_rate < 1.0);
  }
}

TEST_CASE("chain follows the stated accept rule") {
  const Fixture f = curve_fixture(80, 2);
  const Index i = 7;
  const VertexContext ctx(f.g, f.shared, i);
  McmcConfig cfg;
  cfg.burn_in = 30;
  cfg.keep = 40;
  cfg.thin = 3;
  cfg.seed = 11;
  const Chain c = mh_chain(ctx, cfg);

  // Replay with the same stream and an independent implementation of the
  // proposal and of the rule log U < delta loglik + delta log prior.
  double info = 0.0;
  for (Index j = 0; j < 80; ++j) {
    const double p = std::clamp(ctx.ptilde()(j), ctx.tau(), 1 - ctx.tau());
    info += f.e.Xtilde(j, 0) * f.e.Xtilde(j, 0) / (p * (1 - p));
  }
  info /= 80.0;
  const double sd = cfg.sigma_for(1) * std::sqrt(1.0 / (info * 80.0));
  Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(i)}));
  double x = f.e.Xtilde(i, 0);
  long accepted = 0;
  std::vector<double> kept;
  const long total = cfg.burn_in + static_cast<long>(cfg.keep) * cfg.thin;
  for (long t = 1; t <= total; ++t) {
    double cand = 0.0;
    do {
      cand = x + sd * rng.normal();
    } while (!(cand * cand < 1.0));
    const double delta = surrogate_loglik(ctx, vec({cand})) - surrogate_loglik(ctx, vec({x}));
    if (std::log(rng.uniform_open()) < delta + 0.0) {
      x = cand;
      ++accepted;
    }
    if (t > cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0) kept.push_back(x);
  }
  REQUIRE(kept.size() == 40);
  for (Index k = 0; k < 40; ++k) CHECK(c.draws(k, 0) == doctest::Approx(kept[static_cast<std::size_t>(k)]).epsilon(1e-12));
  CHECK(c.accept_rate == doctest::Approx(static_cast<double>(accepted) / total));
}

TEST_CASE("uniform prior") {
  CHECK(log_prior(Prior::kUniformBall, vec({0.3, 0.4})) == 0.0);
  CHECK(log_prior(Prior::kUniformBall, vec({0.9})) - log_prior(Prior::kUniformBall, vec({-0.1})) == 0.0);
  CHECK(std::isinf(log_prior(Prior::kUniformBall, vec({1.0}))));
}

TEST_CASE("posterior summary") {
  Chain two;
  two.draws.resize(2, 2);
  two.draws << 0.0, 0.0, 0.2, 0.0;
  const PosteriorSummary s = posterior_summary(two);
  CHECK(s.mean(0) == doctest::Approx(0.1));
  CHECK(s.mean(1) == 0.0);
  CHECK(s.cov(0, 0) == doctest::Approx(0.01));
  CHECK_FALSE(s.degenerate);

  Chain c;
  c.draws.resize(5, 2);
  c.draws << 0.1, 0.2, 0.3, -0.1, 0.0, 0.05, 0.2, 0.2, -0.1, 0.0;
  Chain shuffled = c;
  shuffled.draws.row(0).swap(shuffled.draws.row(3));
  shuffled.draws.row(1).swap(shuffled.draws.row(4));
  const PosteriorSummary a = posterior_summary(c);
  const PosteriorSummary b = posterior_summary(shuffled);
  CHECK((a.mean - b.mean).norm() < 1e-15);
  CHECK((a.cov - b.cov).norm() < 1e-15);

  Chain one;
  one.draws = Matrix::Zero(1, 1);
  CHECK_THROWS_AS(posterior_summary(one), ModelError);
}

TEST_CASE("credible sets") {
  PosteriorSummary s{vec({0.0}), Matrix::Identity(1, 1), false};
  const CredibleSet set = credible_set(s, 0.05);
  CHECK(contains(set, vec({1.9})));
  CHECK(contains(set, vec({-1.9})));
  CHECK_FALSE(contains(set, vec({2.0})));
  CHECK(contains(set, vec({0.0})));

  Matrix cov(2, 2);
  cov << 0.04, 0.01, 0.01, 0.02;
  const PosteriorSummary s2{vec({0.3, 0.1}), cov, false};
  const double theta = 0.8;
  Matrix r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const PosteriorSummary rotated{r * s2.mean, r * cov * r.transpose(), false};
  const CredibleSet a = credible_set(s2, 0.1);
  const CredibleSet b = credible_set(rotated, 0.1);
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const Vector q = s2.mean + 0.4 * vec({rng.normal(), rng.normal()});
    CHECK(contains(a, q) == contains(b, r * q));
  }
  CHECK(contains(a, s2.mean));
}

TEST_CASE("autocorrelation") {
  std::vector<double> alt;
  for (int t = 0; t < 1000; ++t) alt.push_back(t % 2 == 0 ? 1.0 : -1.0);
  const Acf a = acf(alt, 3);
  CHECK(a.values[0] == 1.0);
  CHECK(a.values[1] == doctest::Approx(-1.0).epsilon(1e-2));

  Rng rng(12);
  std::vector<double> noise;
  for (int t = 0; t < 1000; ++t) noise.push_back(rng.normal());
  const Acf w = acf(noise, 10);
  for (int k = 1; k <= 10; ++k) CHECK(std::abs(w.values[static_cast<std::size_t>(k)]) < 0.1);

  const Acf flat = acf(std::vector<double>(20, 0.4), 5);
  CHECK(flat.constant);
  CHECK(flat.values[0] == 1.0);
  CHECK(flat.values[3] == 0.0);
  CHECK_THROWS_AS(acf({1.0, 2.0}, 2), ModelError);
}

TEST_CASE("bayes_all does not depend on the thread count") {
  const Fixture f = curve_fixture(120, 5);
  McmcConfig cfg;
  cfg.burn_in = 100;
  cfg.keep = 50;
  cfg.seed = 8;
  const BayesResult one = bayes_all(f.g, f.e, cfg, {.threads = 1});
  const BayesResult three = bayes_all(f.g, f.e, cfg, {.threads = 3});
  CHECK(one.Xstar == three.Xstar);
  CHECK(one.accept_rates == three.accept_rates);
  CHECK(one.chains.empty());
  const BayesResult kept = bayes_all(f.g, f.e, cfg, {.threads = 2, .keep_chains = true});
  REQUIRE(kept.chains.size() == 120);
  CHECK(kept.chains[17].draws.rows() == 50);
  CHECK(kept.Xstar(17, 0) == doctest::Approx(kept.chains[17].draws.col(0).mean()).epsilon(1e-14));
}
