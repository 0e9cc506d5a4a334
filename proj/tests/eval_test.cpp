#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cdgad/metrics.hpp"
#include "cdgad/rng.hpp"

using namespace cdgad;

namespace {

// O(n^2) pairwise oracle for the Mann-Whitney statistic.
double auc_roc_oracle(const Vector& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  long pairs = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (Eigen::Index j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores(i) > scores(j)) {
        wins += 1.0;
      } else if (scores(i) == scores(j)) {
        wins += 0.5;
      }
    }
  }
  return wins / static_cast<double>(pairs);
}

// threshold-sweep oracle for average precision over all distinct thresholds
double auc_pr_oracle(const Vector& scores, const std::vector<int>& labels) {
  std::set<double, std::greater<double>> thresholds(scores.data(),
                                                    scores.data() + scores.size());
  const double total_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  double area = 0.0;
  double prev_recall = 0.0;
  for (double t : thresholds) {
    long tp = 0, fp = 0;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
      if (scores(i) >= t) {
        if (labels[i] == 1) {
          ++tp;
        } else {
          ++fp;
        }
      }
    }
    const double recall = tp / total_pos;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return area;
}

}  // namespace

TEST_CASE("auc_roc: perfect separation scores 1") {
  Vector s(4);
  s << 0.9, 0.8, 0.2, 0.1;
  CHECK(auc_roc(s, {1, 1, 0, 0}) == doctest::Approx(1.0));
}

TEST_CASE("auc_roc: constant scores give 0.5") {
  Vector s = Vector::Constant(10, 3.3);
  std::vector<int> y(10, 0);
  y[0] = y[1] = 1;
  CHECK(auc_roc(s, y) == doctest::Approx(0.5));
}

TEST_CASE("auc_roc: matches the pairwise oracle exactly") {
  Rng rng(91);
  for (int trial = 0; trial < 200; ++trial) {
    Vector s(50);
    std::vector<int> y(50);
    int pos = 0;
    for (int i = 0; i < 50; ++i) {
      // quantized scores force plenty of ties
      s(i) = std::floor(rng.uniform(0.0, 10.0)) / 10.0;
      y[i] = rng.bernoulli(0.3) ? 1 : 0;
      pos += y[i];
    }
    if (pos == 0) y[0] = 1;
    if (pos == 50) y[0] = 0;
    CHECK(auc_roc(s, y) == auc_roc_oracle(s, y));
  }
}

TEST_CASE("auc_pr: perfect ranking scores 1") {
  Vector s(5);
  s << 5, 4, 3, 2, 1;
  CHECK(auc_pr(s, {1, 1, 0, 0, 0}) == doctest::Approx(1.0));
}

TEST_CASE("auc_pr: constant scores give the prevalence") {
  Vector s = Vector::Constant(8, 1.0);
  std::vector<int> y = {1, 1, 0, 0, 0, 0, 0, 0};
  CHECK(auc_pr(s, y) == doctest::Approx(0.25));
}

TEST_CASE("auc_pr: matches the threshold-sweep oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    Vector s(30);
    std::vector<int> y(30);
    int pos = 0;
    for (int i = 0; i < 30; ++i) {
      s(i) = std::floor(rng.uniform(0.0, 8.0));
      y[i] = rng.bernoulli(0.25) ? 1 : 0;
      pos += y[i];
    }
    if (pos == 0) y[0] = 1;
    if (pos == 30) y[0] = 0;
    CHECK(auc_pr(s, y) == doctest::Approx(auc_pr_oracle(s, y)).epsilon(1e-12));
  }
}

TEST_CASE("metrics reject single-class labels") {
  Vector s(3);
  s << 1, 2, 3;
  CHECK_THROWS_AS(auc_roc(s, {0, 0, 0}), MetricError);
  CHECK_THROWS_AS(auc_pr(s, {1, 1, 1}), MetricError);
}

TEST_CASE("auc_roc is invariant under strictly increasing transforms") {
  Rng rng(5);
  Vector s(40);
  std::vector<int> y(40);
  for (int i = 0; i < 40; ++i) {
    s(i) = rng.uniform(-3.0, 3.0);
    y[i] = rng.bernoulli(0.2) ? 1 : 0;
  }
  y[0] = 1;
  y[1] = 0;
  Vector t = s.unaryExpr([](double v) { return std::exp(0.7 * v) + 2.0; });
  CHECK(auc_roc(s, y) == doctest::Approx(auc_roc(t, y)).epsilon(1e-14));
}

TEST_CASE("negating scores flips auc_roc") {
  Rng rng(6);
  Vector s(25);
  std::vector<int> y(25);
  for (int i = 0; i < 25; ++i) {
    s(i) = rng.uniform(-1.0, 1.0);
    y[i] = rng.bernoulli(0.3) ? 1 : 0;
  }
  y[0] = 1;
  y[1] = 0;
  CHECK(auc_roc(s, y) == doctest::Approx(1.0 - auc_roc(-s, y)).epsilon(1e-14));
}

TEST_CASE("summarize_runs") {
  MetricsReport a{0.8, 0.3, 0.05};
  MetricsReport b{0.9, 0.4, 0.05};
  SUBCASE("single run has zero std") {
    AggregateReport agg = summarize_runs({a});
    CHECK(agg.auc_roc_mean == doctest::Approx(0.8));
    CHECK(agg.auc_roc_std == doctest::Approx(0.0));
  }
  SUBCASE("two runs average") {
    AggregateReport agg = summarize_runs({a, b});
    CHECK(agg.auc_roc_mean == doctest::Approx(0.85));
    CHECK(agg.auc_pr_mean == doctest::Approx(0.35));
    CHECK(agg.auc_roc_std == doctest::Approx(0.05));
  }
  SUBCASE("formatting uses three decimals") {
    CHECK(format_mean_std(0.8675, 0.0091) == "0.868±0.009");
  }
}
