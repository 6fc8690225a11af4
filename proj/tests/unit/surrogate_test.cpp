#include "helpers.hpp"
#include "rdpg/rng.hpp"
#include "rdpg/surrogate.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace rdpg;
using rdpg::testing::column;
using rdpg::testing::make_context;
using rdpg::testing::vec;

namespace {

// m(u) and its derivatives written out directly.
double m0(double u, double p, int a) { return a * u / p + u - u * u / (2 * p) + (1 - a) * std::log(1 - u); }
double m1(double u, double p, int a) { return (a - u) / p + 1 - (1 - a) / (1 - u); }
double m2(double u, double p, int a) { return -1 / p - (1 - a) / ((1 - u) * (1 - u)); }

struct RandomInstance {
  Matrix xtilde;
  std::vector<std::uint8_t> a;
  Vector x;
};

// Rows with positive entries so every ptilde and every <x, xtilde_j> is in
// (0, 1) and away from the concatenation boundary.
RandomInstance random_instance(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  RandomInstance r;
  r.xtilde.resize(n, d);
  const double scale = 0.9 / std::sqrt(static_cast<double>(d));
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < d; ++k) r.xtilde(j, k) = scale * (0.1 + 0.9 * rng.uniform());
    r.a.push_back(rng.uniform() < 0.5 ? 1 : 0);
  }
  r.x.resize(d);
  for (Index k = 0; k < d; ++k) r.x(k) = scale * (0.1 + 0.85 * rng.uniform());
  return r;
}

Vector fd_gradient(const VertexContext& ctx, const Vector& x, double h) {
  Vector g(x.size());
  for (Index k = 0; k < x.size(); ++k) {
    Vector xp = x;
    Vector xm = x;
    xp(k) += h;
    xm(k) -= h;
    g(k) = (surrogate_loglik(ctx, xp) - surrogate_loglik(ctx, xm)) / (2 * h);
  }
  return g;
}

Matrix fd_hessian(const VertexContext& ctx, const Vector& x, double h) {
  Matrix hm(x.size(), x.size());
  for (Index k = 0; k < x.size(); ++k) {
    Vector xp = x;
    Vector xm = x;
    xp(k) += h;
    xm(k) -= h;
    hm.col(k) = (surrogate_grad(ctx, xp) - surrogate_grad(ctx, xm)) / (2 * h);
  }
  return hm;
}

}  // namespace

TEST_CASE("surrogate on the two-vertex scalar instance") {
  const Matrix xt = column({0.6, 0.5});
  const VertexContext ctx = make_context(xt, {0, 1}, 0);
  const Vector x = vec({0.7});

  const double value = (0.42 - 0.245 + std::log(0.58)) + (0.35 / 0.30 + 0.35 - 0.1225 / 0.6);
  CHECK(value == doctest::Approx(0.9428).epsilon(1e-4));
  CHECK(surrogate_loglik(ctx, x) == doctest::Approx(value).epsilon(1e-12));

  const double grad = -0.42 * (1 / 0.36 + 1 / 0.58) * 0.6 + 0.65 * (1 / 0.30 + 1 / 0.65) * 0.5;
  CHECK(grad == doctest::Approx(0.4489).epsilon(1e-4));
  CHECK(surrogate_grad(ctx, x)(0) == doctest::Approx(grad).epsilon(1e-12));

  const double hess = -(0.36 * (1 / 0.36 + 1 / (0.58 * 0.58)) + 0.25 / 0.30);
  CHECK(surrogate_hess(ctx, x)(0, 0) == doctest::Approx(hess).epsilon(1e-12));
  CHECK(hess == doctest::Approx(-2.90349).epsilon(1e-5));
}

TEST_CASE("concatenation coefficients") {
  const ConcatCoeffs c = concat_coeffs(0.5, 0, 0.1);
  CHECK(c.alpha == doctest::Approx(-51.0).epsilon(1e-12));
  CHECK(c.beta == doctest::Approx(81.0).epsilon(1e-12));
  CHECK(c.gamma == doctest::Approx(-33.8026).epsilon(1e-6));

  for (double p : {0.05, 0.3, 0.5, 0.9}) {
    for (double tau : {0.01, 0.1, 0.3}) {
      const ConcatCoeffs q = concat_coeffs(p, 0, tau);
      const double u0 = 1 - tau;
      const double value = q.alpha * u0 * u0 + q.beta * u0 + q.gamma;
      CHECK(std::abs(value - m0(u0, p, 0)) <= 1e-8 * std::max(1.0, std::abs(m0(u0, p, 0))));
      CHECK(std::abs(2 * q.alpha * u0 + q.beta - m1(u0, p, 0)) <= 1e-8 * std::abs(m1(u0, p, 0)));
      CHECK(std::abs(2 * q.alpha - m2(u0, p, 0)) <= 1e-8 * std::abs(m2(u0, p, 0)));
    }
  }
}

TEST_CASE("concatenated terms are continuous across the threshold") {
  const double tau = 0.1;
  const Matrix xt = column({0.5, 0.8, 0.6});
  const VertexContext ctx = make_context(xt, {0, 0, 1}, 0, {.tau = tau, .concat = true});
  const double u0 = 1 - tau;
  for (Index j = 0; j < 3; ++j) {
    // One-sided values minus the smooth change over the gap.
    const double h = 1e-11;
    const double f1 = ctx.term_d1(j, u0);
    const double f2 = ctx.term_d2(j, u0);
    CHECK(std::abs(ctx.term(j, u0 + h) - ctx.term(j, u0 - h) - 2 * h * f1) <= 1e-8);
    CHECK(std::abs(ctx.term_d1(j, u0 + h) - ctx.term_d1(j, u0 - h) - 2 * h * f2) <= 1e-8 * std::max(1.0, std::abs(f1)));
    CHECK(std::abs(ctx.term_d2(j, u0 + h) - ctx.term_d2(j, u0 - h)) <= 1e-8 * std::max(1.0, std::abs(f2)));
    // Past the threshold the term stays finite even at and beyond u = 1.
    CHECK(std::isfinite(ctx.term(j, 1.0)));
    CHECK(std::isfinite(ctx.term(j, 1.3)));
    CHECK(ctx.term_fast(j, 0.95) == ctx.term(j, 0.95));
    CHECK(ctx.term_d1_fast(j, 0.95) == ctx.term_d1(j, 0.95));
    CHECK(ctx.term_fast(j, 0.3) == doctest::Approx(ctx.term(j, 0.3)).epsilon(1e-15));
    CHECK(ctx.term_d1_fast(j, 0.3) == doctest::Approx(ctx.term_d1(j, 0.3)).epsilon(1e-14));
  }
}

TEST_CASE("without concatenation the log branch is used everywhere") {
  const Matrix xt = column({0.6, 0.5});
  const VertexContext ctx = make_context(xt, {0, 1}, 0, {.tau = 0.01, .concat = false});
  CHECK(surrogate_loglik(ctx, vec({0.7})) == doctest::Approx(0.9428).epsilon(1e-4));
  const Matrix big = column({1.2, 1.0});
  const VertexContext out = make_context(big, {0, 0}, 0, {.tau = 0.01, .concat = false});
  CHECK_THROWS_AS(surrogate_loglik(out, vec({0.95})), DomainError);
}

TEST_CASE("gradient and Hessian agree with finite differences") {
  for (Index d : {1, 2, 3}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const RandomInstance r = random_instance(40, d, 1000 * d + seed);
      const VertexContext ctx = make_context(r.xtilde, r.a, 3);
      const Vector g = surrogate_grad(ctx, r.x);
      const Vector gfd = fd_gradient(ctx, r.x, 1e-6);
      CHECK((g - gfd).norm() <= 1e-5 * g.norm());
      const Matrix h = surrogate_hess(ctx, r.x);
      CHECK((h - fd_hessian(ctx, r.x, 1e-6)).norm() <= 1e-4 * h.norm());
      CHECK((h - h.transpose()).norm() == 0.0);
    }
  }
}

TEST_CASE("finite differences hold across the concatenation boundary") {
  // u_1 = x straddles 1 - tau = 0.9 for this instance.
  const Matrix xt = column({0.8, 1.0, 0.7});
  const VertexContext ctx = make_context(xt, {0, 0, 1}, 0, {.tau = 0.1, .concat = true});
  for (double x : {0.899, 0.9 - 1e-7, 0.9 + 1e-7, 0.93}) {
    const Vector p = vec({x});
    const double g = surrogate_grad(ctx, p)(0);
    CHECK(std::abs(g - fd_gradient(ctx, p, 1e-6)(0)) <= 1e-5 * std::abs(g));
    const double h = surrogate_hess(ctx, p)(0, 0);
    CHECK(std::abs(h - fd_hessian(ctx, p, 1e-6)(0, 0)) <= 1e-4 * std::abs(h));
  }
}

TEST_CASE("surrogate is concave on the ball") {
  for (Index d : {1, 2, 3}) {
    const RandomInstance r = random_instance(30, d, 77 + d);
    const VertexContext ctx = make_context(r.xtilde, r.a, 0);
    Rng rng(d);
    for (int trial = 0; trial < 50; ++trial) {
      Vector x(d);
      Vector y(d);
      for (Index k = 0; k < d; ++k) {
        x(k) = rng.uniform() * 0.9 / std::sqrt(static_cast<double>(d));
        y(k) = rng.uniform() * 0.9 / std::sqrt(static_cast<double>(d));
      }
      const double t = rng.uniform();
      const double mid = surrogate_loglik(ctx, t * x + (1 - t) * y);
      CHECK(mid >= t * surrogate_loglik(ctx, x) + (1 - t) * surrogate_loglik(ctx, y) - 1e-9);
    }
  }
}

TEST_CASE("gradient is affine in the adjacency row") {
  const RandomInstance r = random_instance(25, 2, 5);
  std::vector<std::uint8_t> flipped = r.a;
  for (std::size_t j = 0; j < flipped.size(); j += 3) flipped[j] ^= 1;
  const VertexContext ca = make_context(r.xtilde, r.a, 1);
  const VertexContext cb = make_context(r.xtilde, flipped, 1);
  Vector expect = Vector::Zero(2);
  for (Index j = 0; j < 25; ++j) {
    const double diff = static_cast<double>(r.a[static_cast<std::size_t>(j)]) - flipped[static_cast<std::size_t>(j)];
    const double u = r.xtilde.row(j).dot(r.x.transpose());
    expect += diff * (1 / ca.ptilde()(j) + 1 / (1 - u)) * r.xtilde.row(j).transpose();
  }
  CHECK((surrogate_grad(ca, r.x) - surrogate_grad(cb, r.x) - expect).norm() <= 1e-10 * expect.norm());
}

TEST_CASE("stable loglik difference and batch gradient") {
  const RandomInstance r = random_instance(50, 2, 9);
  const VertexContext ctx = make_context(r.xtilde, r.a, 4);
  const Vector y = r.x * 0.97;
  CHECK(surrogate_loglik_delta(ctx, r.x, y) ==
        doctest::Approx(surrogate_loglik(ctx, y) - surrogate_loglik(ctx, r.x)).epsilon(1e-9));
  std::vector<Index> all(50);
  for (Index j = 0; j < 50; ++j) all[static_cast<std::size_t>(j)] = j;
  CHECK((batch_gradient(ctx, r.x, all) - surrogate_grad(ctx, r.x) / 50.0).norm() < 1e-12);
  const std::vector<Index> one{7, 7};
  const double u = r.xtilde.row(7).dot(r.x.transpose());
  CHECK((batch_gradient(ctx, r.x, one) - ctx.term_d1(7, u) * r.xtilde.row(7).transpose()).norm() < 1e-14);
}

TEST_CASE("context rejects a zero inner product") {
  Matrix xt(2, 2);
  xt << 1, 0, 0, 1;
  CHECK_THROWS_AS(make_context(xt, {0, 0}, 0), NumericError);
}

TEST_CASE("oracle log-likelihood") {
  LatentTruth truth;
  truth.X0 = column({0.5, 0.5});
  const Graph g = Graph::from_edges(2, {{0, 1}}, false);
  CHECK(oracle_loglik(0, vec({0.5}), truth, g) == doctest::Approx(std::log(0.25) + std::log(0.75)).epsilon(1e-14));
  CHECK_THROWS_AS(oracle_loglik(0, vec({1.5}), truth, g), DomainError);

  const LatentTruth curve = curve_spec(200, CurveVariant::kSection23);
  const Graph cg = sample_rdpg(curve, 3);
  const Vector xm = oracle_mle(50, curve, cg);
  const double h = 1e-6;
  const double slope = (oracle_loglik(50, xm + vec({h}), curve, cg) - oracle_loglik(50, xm - vec({h}), curve, cg)) / (2 * h);
  CHECK(std::abs(slope) < 1e-4);
}

TEST_CASE("one-step objective and estimator") {
  SUBCASE("scalar instance") {
    const Matrix xt = column({0.6, 0.5});
    const VertexContext ctx = make_context(xt, {0, 1}, 0, {.tau = 0.01, .concat = false});
    const double w1 = 1 / (0.36 * 0.64);
    const double w2 = 1 / (0.30 * 0.70);
    const double obj = (0 - 0.36) * 0.06 * w1 - 0.5 * 0.06 * 0.06 * w1 + (1 - 0.30) * 0.05 * w2 - 0.5 * 0.05 * 0.05 * w2;
    CHECK(ose_objective(ctx, vec({0.7})) == doctest::Approx(obj).epsilon(1e-12));
    CHECK(ose_objective(ctx, vec({0.6})) == 0.0);
    const double step = ((0 - 0.36) * 0.6 * w1 + (1 - 0.30) * 0.5 * w2) / (0.36 * w1 + 0.25 * w2);
    CHECK(one_step_vertex(ctx)(0) == doctest::Approx(0.6 + step).epsilon(1e-12));
  }
  SUBCASE("zero score is a fixed point") {
    // p = 0.25 for every pair and one edge in four.
    const Matrix xt = column({0.5, 0.5, 0.5, 0.5});
    const VertexContext ctx = make_context(xt, {1, 0, 0, 0}, 0, {.tau = 0.01, .concat = false});
    CHECK(one_step_vertex(ctx)(0) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("one step maximizes the quadratic objective") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const RandomInstance r = random_instance(30, 2, 300 + seed);
      const VertexContext ctx = make_context(r.xtilde, r.a, 2, {.tau = 0.01, .concat = false});
      const Vector xs = one_step_vertex(ctx);
      const double best = ose_objective(ctx, xs);
      Rng rng(seed);
      for (int k = 0; k < 20; ++k) {
        const Vector pert = vec({rng.normal(), rng.normal()}) * 1e-3;
        CHECK(ose_objective(ctx, xs + pert) <= best + 1e-12);
      }
    }
  }
}

TEST_CASE("one_step over a graph") {
  const LatentTruth truth = curve_spec(150, CurveVariant::kSection51);
  const Graph g = sample_rdpg(truth, 4);
  const Embedding e = ase(g, 1);
  const Matrix xo = one_step(e, g, false);
  const auto shared = VertexContext::share(e.Xtilde);
  for (Index i : {0, 40, 149}) {
    VertexContext ctx(g, shared, i, {.tau = 0.01, .concat = false});
    CHECK(xo(i, 0) == doctest::Approx(one_step_vertex(ctx)(0)).epsilon(1e-14));
  }
}

TEST_CASE("Fisher information") {
  LatentTruth flat;
  flat.X0 = Matrix::Constant(10, 1, 0.5);
  CHECK(fisher_true(flat, 3).G(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(fisher_plugin(flat.X0, 3).G(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

  const LatentTruth curve = curve_spec(100, CurveVariant::kSection51);
  for (Index i : {0, 33, 99}) {
    const Matrix g = fisher_true(curve, i).G;
    CHECK(g(0, 0) > 0.0);
    CHECK(fisher_plugin(curve.X0, i).G(0, 0) == doctest::Approx(g(0, 0)).epsilon(1e-14));
  }
  LatentTruth doubled;
  doubled.X0.resize(200, 1);
  doubled.X0 << curve.X0, curve.X0;
  CHECK(fisher_true(doubled, 10).G(0, 0) == doctest::Approx(fisher_true(curve, 10).G(0, 0)).epsilon(1e-13));

  Matrix blocks(6, 2);
  blocks << 0.3, 0.3, 0.5, 0.5, 0.7, 0.7, 0.3, 0.7, 0.7, 0.3, 0.4, 0.2;
  LatentTruth two;
  two.X0 = blocks;
  const Eigen::SelfAdjointEigenSolver<Matrix> es(fisher_true(two, 1).G);
  CHECK(es.eigenvalues().minCoeff() > 0.0);

  Matrix bad = column({0.5, -0.5});
  CHECK_THROWS_AS(fisher_plugin(bad, 0), DomainError);
}
