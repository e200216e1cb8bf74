#include <doctest.h>

#include <cmath>

#include "cmatch/oracle.hpp"
#include "cmatch/rng.hpp"
#include "support.hpp"

using namespace cmatch;

TEST_CASE("mean and standard error") {
  const auto constant = oracle::mc_mean_with_se([] { return 2.5; }, 100);
  CHECK(constant.mean == 2.5);
  CHECK(constant.se == 0.0);
  CHECK(oracle::within_se(constant, 2.5, 4));

  Rng rng(1);
  const auto coin = oracle::mc_mean_with_se([&] { return rng.uniform01() < 0.5 ? 1.0 : 0.0; }, 10000);
  CHECK(oracle::within_se(coin, 0.5, 4));

  Rng again(2);
  std::vector<double> xs;
  const auto streamed = oracle::mc_mean_with_se([&] {
    xs.push_back(again.uniform01() * 3 - 1);
    return xs.back();
  }, 500);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  CHECK(streamed.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(streamed.se == doctest::Approx(se).epsilon(1e-10));
}

TEST_CASE("exhaustive coloring expectation") {
  const WeightedHost host = testing::random_weights(4, 8);
  const std::vector<int> edge{0, 1};
  const auto shape = RootedTreeShape::from_levels(edge);
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(oracle::exhaustive_coloring_expectation(host, shape, i) -
                   colorful_probability(1) * exact_signed_count(host, i, shape)) <= 1e-12);

  std::vector<double> zeros(25, 0.0);
  const WeightedHost zero = WeightedHost::from_dense(5, zeros);
  const std::vector<int> cherry{0, 1, 1};
  CHECK(oracle::exhaustive_coloring_expectation(zero, RootedTreeShape::from_levels(cherry), 0) == 0.0);
  CHECK(oracle::exhaustive_coloring_expectation(host, RootedTreeShape(), 2) == 1.0);

  const WeightedHost big = testing::random_weights(16, 8);  // 3^16 colorings
  CHECK_THROWS(oracle::exhaustive_coloring_expectation(big, RootedTreeShape::from_levels(cherry), 0));
}
