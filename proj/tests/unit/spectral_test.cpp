#include "rdpg/graph.hpp"
#include "rdpg/rng.hpp"
#include "rdpg/spectral.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace rdpg;

namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

Matrix rotation(double theta) {
  Matrix r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

}  // namespace

TEST_CASE("eigh_sym on small hand cases") {
  SUBCASE("diagonal") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 3.0;
    m(1, 1) = 1.0;
    const SymEigen e = eigh_sym(m);
    CHECK(e.values(0) == doctest::Approx(3.0));
    CHECK(e.values(1) == doctest::Approx(1.0));
    CHECK((e.vectors - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("swap matrix") {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    const SymEigen e = eigh_sym(m);
    CHECK(e.values(0) == doctest::Approx(1.0));
    CHECK(e.values(1) == doctest::Approx(-1.0));
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(e.vectors(0, 0) == doctest::Approx(s));
    CHECK(e.vectors(1, 0) == doctest::Approx(s));
    CHECK(std::abs(e.vectors(0, 1)) == doctest::Approx(s));
    CHECK(e.vectors(0, 1) == doctest::Approx(-e.vectors(1, 1)));
  }
  SUBCASE("asymmetric input is rejected") {
    Matrix m(2, 2);
    m << 0, 1, 1.001, 0;
    CHECK_THROWS_AS(eigh_sym(m), ModelError);
  }
}

TEST_CASE("eigh_sym reconstructs a random symmetric matrix") {
  const Matrix r = random_matrix(8, 8, 3);
  const Matrix m = r + r.transpose();
  const SymEigen e = eigh_sym(m);
  CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(8, 8)).norm() < 1e-8);
  CHECK((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - m).norm() <= 1e-8 * m.norm());
  for (Index k = 1; k < 8; ++k) CHECK(std::abs(e.values(k - 1)) >= std::abs(e.values(k)));
  for (Index k = 0; k < 8; ++k) {
    Index arg = 0;
    e.vectors.col(k).cwiseAbs().maxCoeff(&arg);
    CHECK(e.vectors(arg, k) > 0.0);
  }
}

TEST_CASE("top_eigenpairs agrees with the full decomposition") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Matrix r = random_matrix(40, 40, seed);
    const Matrix m = r + r.transpose();
    const SymEigen full = eigh_sym(m);
    for (Index d : {1, 3, 6}) {
      const SymEigen top = top_eigenpairs(m, d);
      CHECK((top.values - full.values.head(d)).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((top.vectors - full.vectors.leftCols(d)).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("adjacency spectral embedding") {
  SUBCASE("all-ones matrix") {
    const Graph g = Graph::from_dense(Matrix::Ones(4, 4), false);
    const Embedding e = ase(g, 1);
    CHECK(e.eigvals(0) == doctest::Approx(4.0));
    CHECK((e.Xtilde.cwiseAbs() - Matrix::Ones(4, 1)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("two blocks") {
    Matrix a = Matrix::Zero(4, 4);
    a.topLeftCorner(2, 2).setOnes();
    a.bottomRightCorner(2, 2).setOnes();
    const Embedding e = ase(Graph::from_dense(a, false), 2);
    CHECK((e.Xtilde.transpose() * e.Xtilde - 2.0 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("scaled eigenvectors and rank-d reconstruction") {
    const Graph g = sample_rdpg(curve_spec(120, CurveVariant::kSection51), 9);
    const Embedding e = ase(g, 2);
    Matrix expect = Matrix::Zero(2, 2);
    expect.diagonal() = e.eigvals.cwiseAbs();
    CHECK((e.Xtilde.transpose() * e.Xtilde - expect).cwiseAbs().maxCoeff() < 1e-8);
    const SymEigen full = eigh_sym(g.dense());
    Matrix best = Matrix::Zero(120, 120);
    for (Index k = 0; k < 2; ++k) best += full.values(k) * full.vectors.col(k) * full.vectors.col(k).transpose();
    const Matrix signs = e.eigvals.array().sign().matrix().asDiagonal();
    CHECK((e.Xtilde * signs * e.Xtilde.transpose() - best).norm() < 1e-8);
    CHECK(ase(g, 2).Xtilde == e.Xtilde);
  }
  SUBCASE("degenerate dimension is rejected") {
    Matrix a = Matrix::Zero(3, 3);
    a(0, 1) = a(1, 0) = 1.0;
    CHECK_THROWS_AS(ase(Graph::from_dense(a, true), 3), ModelError);
    CHECK_THROWS_AS(ase(Graph::from_dense(a, true), 0), ModelError);
  }
}

TEST_CASE("procrustes") {
  const Matrix x = random_matrix(6, 2, 21);
  SUBCASE("identity alignment") {
    const Alignment al = procrustes(x, x);
    CHECK((al.W - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(al.residual < 1e-20);
  }
  SUBCASE("exact rotation is undone") {
    const Matrix r = rotation(0.7);
    const Alignment al = procrustes(x * r, x);
    CHECK((al.W - r.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(al.residual <= 1e-18);
    CHECK((al.W.transpose() * al.W - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("orthogonal invariance of the residual") {
    const Matrix y = random_matrix(6, 2, 22);
    Matrix q = rotation(1.3);
    q.col(1) *= -1.0;
    CHECK(procrustes(x * q, y).residual == doctest::Approx(procrustes(x, y).residual).epsilon(1e-10));
  }
}

TEST_CASE("procrustes matches a grid search over O(2)") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Matrix a = random_matrix(6, 2, 100 + seed);
    const Matrix b = random_matrix(6, 2, 200 + seed);
    double best = 1e300;
    const int steps = 100000;
    Matrix flip = Matrix::Identity(2, 2);
    flip(1, 1) = -1.0;
    for (int k = 0; k < steps; ++k) {
      const Matrix r = rotation(2.0 * std::numbers::pi * k / steps);
      best = std::min(best, (a * r - b).squaredNorm());
      best = std::min(best, (a * r * flip - b).squaredNorm());
    }
    CHECK(std::abs(procrustes(a, b).residual - best) < 1e-4);
  }
}

TEST_CASE("procrustes in one dimension is the better of two signs") {
  const Matrix a = random_matrix(10, 1, 5);
  const Matrix b = random_matrix(10, 1, 6);
  const double plus = (a - b).squaredNorm();
  const double minus = (-a - b).squaredNorm();
  CHECK(procrustes(a, b).residual == doctest::Approx(std::min(plus, minus)).epsilon(1e-14));
}

TEST_CASE("two-to-infinity error of the embedding shrinks with n") {
  std::vector<double> medians;
  for (Index n : {200, 500, 1000}) {
    std::vector<double> errs;
    const LatentTruth truth = curve_spec(n, CurveVariant::kSection51);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Embedding e = ase(sample_rdpg(truth, seed), 1);
      const Alignment al = procrustes(e.Xtilde, truth.X0);
      errs.push_back(two_to_infinity(e.Xtilde * al.W - truth.X0));
    }
    std::nth_element(errs.begin(), errs.begin() + 10, errs.end());
    medians.push_back(errs[10]);
  }
  CHECK(medians[0] > medians[1]);
  CHECK(medians[1] > medians[2]);
}
