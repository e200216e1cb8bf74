#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cmatch/errors.hpp"
#include "cmatch/matchers.hpp"
#include "cmatch/rng.hpp"
#include "support.hpp"

using namespace cmatch;

namespace {

ScoreMatrix from_values(int n, std::vector<double> values) {
  ScoreMatrix m;
  m.n = n;
  m.scores = std::move(values);
  return m;
}

// The thresholding rule, written out directly.
std::vector<int> threshold_reference(const ScoreMatrix& m, double tau) {
  std::vector<int> pick(static_cast<std::size_t>(m.n), -1);
  for (int i = 0; i < m.n; ++i) {
    std::vector<int> above;
    for (int j = 0; j < m.n; ++j)
      if (m.at(i, j) >= tau) above.push_back(j);
    if (above.size() == 1) pick[static_cast<std::size_t>(i)] = above[0];
  }
  std::vector<int> out(pick);
  for (int i = 0; i < m.n; ++i)
    for (int k = 0; k < m.n; ++k)
      if (i != k && pick[static_cast<std::size_t>(i)] >= 0 && pick[static_cast<std::size_t>(i)] == pick[static_cast<std::size_t>(k)])
        out[static_cast<std::size_t>(i)] = -1;
  return out;
}

std::vector<int> targets(const PartialMatching& m) {
  std::vector<int> out;
  for (int i = 0; i < m.universe(); ++i) out.push_back(m.at(i).value_or(-1));
  return out;
}

PartialMatching random_seeds(const std::vector<int>& pi, double fraction, std::uint64_t seed) {
  Rng rng(seed);
  PartialMatching out(static_cast<int>(pi.size()));
  for (std::size_t i = 0; i < pi.size(); ++i)
    if (rng.uniform01() < fraction) out.assign(static_cast<int>(i), pi[i]);
  return out;
}

}  // namespace

TEST_CASE("partial matching stays injective") {
  PartialMatching m(4);
  m.assign(0, 2);
  CHECK_THROWS_AS(m.assign(1, 2), ParameterError);
  CHECK_THROWS_AS(m.assign(0, 3), ParameterError);
  m.assign(1, 0);
  CHECK(m.size() == 2);
  CHECK(m.pairs() == std::vector<std::pair<int, int>>{{0, 2}, {1, 0}});
}

TEST_CASE("threshold matching examples") {
  std::vector<double> v(16, 1.0);
  for (int i = 0; i < 4; ++i) v[static_cast<std::size_t>(i * 5)] = 10.0;
  const auto ident = match_by_threshold(from_values(4, v), 5.0);
  for (int i = 0; i < 4; ++i) CHECK(ident.at(i) == i);

  v[1] = 7.0;  // row 0 now has two columns above tau
  const auto m = match_by_threshold(from_values(4, v), 5.0);
  CHECK_FALSE(m.at(0).has_value());
  CHECK(m.at(1) == 1);

  // Rows 0 and 1 both pick column 2: both dropped.
  const auto clash = match_by_threshold(from_values(3, {0, 0, 9, 0, 0, 9, 9, 0, 0}), 5.0);
  CHECK_FALSE(clash.at(0).has_value());
  CHECK_FALSE(clash.at(1).has_value());
  CHECK(clash.at(2) == 0);
}

TEST_CASE("threshold matching equals the direct rule and ignores monotone transforms") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(36);
    for (double& x : v) x = std::floor(rng.uniform01() * 6);
    const double tau = 3.5 + (trial % 3);
    const ScoreMatrix m = from_values(6, v);
    const auto got = match_by_threshold(m, tau);
    CHECK(targets(got) == threshold_reference(m, tau));
    std::vector<double> w(v);
    for (double& x : w) x = std::exp(x) * 3 + 1;
    CHECK(match_by_threshold(from_values(6, w), std::exp(tau) * 3 + 1) == got);
  }
}

TEST_CASE("rate function and gamma") {
  CHECK(rate_h(1.0) == 0.0);
  CHECK(rate_h(std::exp(1.0)) == doctest::Approx(1.0));
  CHECK(std::abs(solve_gamma(1.0) - std::exp(1.0)) <= 1e-10);
  CHECK(std::abs(solve_gamma(0.5) - 2.1555) <= 1e-3);
  CHECK_THROWS_AS(solve_gamma(0.0), ParameterError);
  CHECK_THROWS_AS(solve_gamma(-1.0), ParameterError);
  Rng rng(3);
  for (int k = 0; k < 1000; ++k) {
    const double target = std::exp(rng.uniform01() * 16 - 8);
    const double g = solve_gamma(target);
    CHECK(g > 1.0);
    CHECK(std::abs(rate_h(g) - target) <= 1e-12);
  }
}

TEST_CASE("seeded matching hand trace on a path") {
  // Path 0-1-2-3-4-5 in both graphs, threshold gamma (n-2) q^2 = 1 * 4 * 0.25 = 1.
  const std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}};
  const Graph g(6, edges);
  PartialMatching seeds(6);
  seeds.assign(0, 0);
  SeededStats stats;
  const auto out = seeded_match(g, g, seeds, 0.5, 1.0, &stats);
  CHECK(stats.threshold == 1.0);
  CHECK(stats.added == 5);
  for (int i = 0; i < 6; ++i) CHECK(out.at(i) == i);

  // Threshold 2: only vertex 1 sees two matched neighbors.
  PartialMatching two(6);
  two.assign(0, 0);
  two.assign(2, 2);
  const auto out2 = seeded_match(g, g, two, 0.5, 2.0, &stats);
  CHECK(stats.added == 1);
  CHECK(out2.at(1) == 1);
  CHECK_FALSE(out2.at(3).has_value());
}

TEST_CASE("seeded matching: empty seeds change nothing") {
  const GraphPair pair = sample_pair(50, 0.2, 1.0, PiMode::uniform, 3);
  const auto out = seeded_match(pair.a, pair.b, PartialMatching(50), 0.2, seeded_gamma(50, 0.2));
  CHECK(out.size() == 0);
}

TEST_CASE("seeded matching keeps seeds, stays injective, and stops only when no pair qualifies") {
  const GraphPair pair = sample_pair(200, 0.1, 0.6, PiMode::uniform, 21);
  const auto seeds = random_seeds(pair.pi, 0.3, 2);
  // A small gamma so that wrong pairs are admitted too.
  const double q = pair.empirical_density();
  const double gamma = 0.4;
  SeededStats stats;
  const auto out = seeded_match(pair.a, pair.b, seeds, q, gamma, &stats);
  for (auto [i, j] : seeds.pairs()) CHECK(out.at(i) == j);
  std::vector<int> used(200, 0);
  for (auto [i, j] : out.pairs()) ++used[static_cast<std::size_t>(j)];
  for (int c : used) CHECK(c <= 1);
  // Full recount of the common-neighbor counters against the final map.
  int violations = 0;
  for (int i = 0; i < 200; ++i) {
    if (out.matched_source(i)) continue;
    for (int j = 0; j < 200; ++j) {
      if (out.matched_target(j)) continue;
      int count = 0;
      for (int u : pair.a.neighbors(i))
        if (auto v = out.at(u); v && pair.b.has_edge(j, *v)) ++count;
      if (count >= stats.threshold) ++violations;
    }
  }
  CHECK(violations == 0);
  CHECK(stats.added > 0);
}

TEST_CASE("seeded matching with 10% seeds stays below the threshold") {
  // A true pair sees about 0.1 n q = 10 seed witnesses against gamma (n - 2) q^2 ~ 36.
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const GraphPair pair = sample_pair(1000, 0.1, 1.0, PiMode::identity, 40 + trial);
    const auto seeds = random_seeds(pair.pi, 0.1, 90 + trial);
    SeededStats stats;
    const auto out = seeded_match(pair.a, pair.b, seeds, 0.1, seeded_gamma(1000, 0.1), &stats);
    CHECK(stats.threshold > 30.0);
    CHECK(stats.added == 0);
    CHECK(out == seeds);
  }
}

TEST_CASE("seeded matching recovers the identity from 90% seeds") {
  int exact = 0;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const GraphPair pair = sample_pair(1000, 0.1, 1.0, PiMode::identity, 40 + trial);
    const auto seeds = random_seeds(pair.pi, 0.9, 90 + trial);
    const auto out = seeded_match(pair.a, pair.b, seeds, 0.1, seeded_gamma(1000, 0.1));
    if (evaluate(out, pair.pi).exact) ++exact;
  }
  CHECK(exact >= 9);
}

TEST_CASE("seeded matching rejects mismatched inputs") {
  const GraphPair pair = sample_pair(10, 0.2, 1.0, PiMode::uniform, 3);
  CHECK_THROWS_AS(seeded_match(pair.a, pair.b, PartialMatching(9), 0.2, 2.0), ParameterError);
  CHECK_THROWS_AS(seeded_gamma(2, 0.2), ParameterError);
}

TEST_CASE("evaluation") {
  const std::vector<int> truth{0, 1, 2, 3, 4};
  PartialMatching ident(5);
  for (int i = 0; i < 5; ++i) ident.assign(i, i);
  const auto all = evaluate(ident, truth);
  CHECK(all.precision == 1.0);
  CHECK(all.coverage == 1.0);
  CHECK(all.accuracy == 1.0);
  CHECK(all.exact);
  const auto none = evaluate(PartialMatching(5), truth);
  CHECK(none.coverage == 0.0);
  CHECK(none.accuracy == 0.0);
  CHECK_FALSE(none.exact);
  // 0->0 right, 1->3 wrong, 4->4 right, 3->1 wrong.
  PartialMatching mixed(5);
  mixed.assign(0, 0);
  mixed.assign(1, 3);
  mixed.assign(4, 4);
  mixed.assign(3, 1);
  const auto m = evaluate(mixed, truth);
  CHECK(m.matched == 4);
  CHECK(m.correct == 2);
  CHECK(m.precision == 0.5);
  CHECK(m.coverage == 0.8);
  CHECK(m.accuracy == 0.4);
}

TEST_CASE("matching file round trip") {
  PartialMatching m(6);
  m.assign(0, 3);
  m.assign(5, 1);
  std::stringstream text;
  write_matching(text, m);
  CHECK(text.str() == "0 3\n5 1\n");
  CHECK(read_matching(text, 6) == m);
  std::stringstream bad("0 1\n2 1\n");
  CHECK_THROWS_AS(read_matching(bad, 6), ParameterError);
  std::stringstream junk("0 x\n");
  CHECK_THROWS_AS(read_matching(junk, 6), FormatError);
}
