#pragma once

// Brute-force and exhaustive-expectation references for the test suites.
// Nothing here shares an evaluation path with the routine it is used to check.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "cmatch/count.hpp"
#include "cmatch/model.hpp"
#include "cmatch/trees.hpp"

namespace cmatch::oracle {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

/// Streaming mean and variance (Welford).
class MeanAccumulator {
 public:
  void add(double x) noexcept {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }
  MeanSe result() const noexcept {
    MeanSe out;
    out.mean = mean_;
    out.count = count_;
    if (count_ > 1) out.se = std::sqrt(m2_ / static_cast<double>(count_ - 1) / static_cast<double>(count_));
    return out;
  }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

template <typename Generator>
MeanSe mc_mean_with_se(Generator&& generator, std::size_t trials) {
  MeanAccumulator acc;
  for (std::size_t t = 0; t < trials; ++t) acc.add(static_cast<double>(generator()));
  return acc.result();
}

/// True when |estimate - target| <= k standard errors (exact equality when se == 0).
inline bool within_se(const MeanSe& estimate, double target, double k) noexcept {
  return std::abs(estimate.mean - target) <= k * estimate.se;
}

/// Root-preserving automorphisms counted by exhaustive bijection search.
std::uint64_t automorphisms_bruteforce(const RootedTreeShape& shape);

/// Colorful copies rooted at `root`, by enumerating embeddings directly.
double colorful_count_bruteforce(const WeightedHost& host, int root, const RootedTreeShape& shape,
                                 const Coloring& coloring);

/// Average of colorful_count over all (N+1)^n colorings.
double exhaustive_coloring_expectation(const WeightedHost& host, const RootedTreeShape& shape, int root);

/// Phi_ij = sum_H aut(H) W_iH(Abar) W_jH(Bbar) from backtracking counts. Row-major n x n.
std::vector<double> phi_bruteforce(const GraphPair& pair, const ChandelierFamily& family);

}  // namespace cmatch::oracle
