#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cdgad/isolation_forest.hpp"
#include "cdgad/rng.hpp"

using namespace cdgad;

TEST_CASE("two distinct 1-d points isolate at depth 1") {
  Matrix x(2, 1);
  x << 0.0, 1.0;
  IsolationForest f = IsolationForest::fit(x, {50, 2, 7});
  // every tree splits once, so both points sit at depth 1 in singleton leaves
  CHECK(f.average_path_length(x.row(0).transpose()) == doctest::Approx(1.0));
  CHECK(f.average_path_length(x.row(1).transpose()) == doctest::Approx(1.0));
  Vector s = f.score(x);
  CHECK(s(0) == doctest::Approx(s(1)));
}

TEST_CASE("all-identical rows degenerate to equal scores") {
  Matrix x = Matrix::Constant(20, 3, 0.5);
  IsolationForest f = IsolationForest::fit(x, {30, 16, 1});
  Vector s = f.score(x);
  for (Eigen::Index i = 1; i < s.size(); ++i) CHECK(s(i) == doctest::Approx(s(0)));
}

TEST_CASE("fitting is deterministic for a fixed seed") {
  Rng rng(100);
  Matrix x(64, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
  IsolationForest a = IsolationForest::fit(x, {40, 32, 9});
  IsolationForest b = IsolationForest::fit(x, {40, 32, 9});
  Vector sa = a.score(x), sb = b.score(x);
  CHECK((sa.array() == sb.array()).all());
}

TEST_CASE("normaliser fixed point: E[h] = c(n) maps to score 0.5") {
  const long n = 256;
  const double c = IsolationForest::path_length_normalizer(n);
  CHECK(IsolationForest::score_from_path_length(c, n) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("c(2) matches the harmonic approximation formula") {
  // 2 H(1) - 2 * 1/2 with H(i) = ln(i) + gamma
  const double expected = 2.0 * (std::log(1.0) + 0.5772156649) - 1.0;
  CHECK(IsolationForest::path_length_normalizer(2) == expected);
}

TEST_CASE("isolated 1-d outlier scores above inliers") {
  Matrix x(4, 1);
  x << 0.0, 0.1, 0.2, 10.0;
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    IsolationForest f = IsolationForest::fit(x, {200, 4, seed});
    Vector s = f.score(x);
    CHECK(s(3) > s(1));
  }
}

TEST_CASE("scores stay inside (0, 1) and decrease with path length") {
  Rng rng(55);
  Matrix x(128, 6);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  IsolationForest f = IsolationForest::fit(x, {100, 64, 3});
  Vector s = f.score(x);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    CHECK(s(i) > 0.0);
    CHECK(s(i) < 1.0);
  }
  CHECK(IsolationForest::score_from_path_length(2.0, 64) >
        IsolationForest::score_from_path_length(5.0, 64));
}

TEST_CASE("more trees shrink the score spread across seeds") {
  Rng rng(77);
  Matrix x(96, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-2.0, 2.0);
  Vector probe = x.row(0).transpose();

  auto spread = [&](int n_trees) {
    double lo = 1.0, hi = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      IsolationForest f = IsolationForest::fit(x, {n_trees, 64, seed});
      const double s =
          IsolationForest::score_from_path_length(f.average_path_length(probe), 64);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    return hi - lo;
  };
  CHECK(spread(400) < spread(50));
}

TEST_CASE("dimension mismatch raises a structural error") {
  Matrix x(8, 2);
  x.setRandom();
  IsolationForest f = IsolationForest::fit(x, {10, 8, 1});
  Matrix probe(1, 3);
  probe.setZero();
  CHECK_THROWS_AS(f.score(probe), StructuralError);
}
