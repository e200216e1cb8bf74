#pragma once

#include <utility>
#include <vector>

#include "cmatch/count.hpp"
#include "cmatch/model.hpp"
#include "cmatch/rng.hpp"

namespace testing {

inline cmatch::Graph random_graph(int n, double p, std::uint64_t seed) {
  cmatch::Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform01() < p) edges.emplace_back(i, j);
  return cmatch::Graph(n, edges);
}

inline cmatch::WeightedHost random_weights(int n, std::uint64_t seed) {
  cmatch::Rng rng(seed);
  std::vector<double> w(static_cast<std::size_t>(n * n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = rng.uniform01() * 2.0 - 1.0;
      w[static_cast<std::size_t>(i * n + j)] = v;
      w[static_cast<std::size_t>(j * n + i)] = v;
    }
  return cmatch::WeightedHost::from_dense(n, w);
}

inline bool close(double a, double b, double rel, double abs_floor = 1e-12) {
  return std::abs(a - b) <= std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

}  // namespace testing
