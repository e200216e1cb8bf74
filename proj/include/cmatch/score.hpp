#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmatch/model.hpp"
#include "cmatch/trees.hpp"

namespace cmatch {

enum class ScoreMode { exact, approx };

struct FamilyFingerprint {
  int K = 0;
  int L = 0;
  int M = 0;
  int N = 0;
  u128 R = kUnboundedAut;
  std::uint64_t size = 0;

  static FamilyFingerprint of(const ChandelierFamily& family);
  friend bool operator==(const FamilyFingerprint&, const FamilyFingerprint&) = default;
};

/// Similarity scores between vertices of A (rows) and vertices of B (columns),
/// with the scalars used to produce them.
struct ScoreMatrix {
  int n = 0;
  std::vector<double> scores;  // row-major n x n
  ScoreMode mode = ScoreMode::exact;
  double mu = 0.0;
  double r = 1.0;            // colorful probability (approx only)
  std::uint64_t t = 0;       // colorings per side (approx only)
  std::uint64_t seed = 0;    // coloring seeds derive from this (approx only)
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
  FamilyFingerprint fingerprint;

  double at(int i, int j) const noexcept {
    return scores[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
  }
  std::span<const double> row(int i) const noexcept {
    return {scores.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
  }
};

/// Phi_ij = sum_H aut(H) W_iH(A - q) W_jH(B - q) with exact signed counts.
/// Limited to N <= 8, n <= 400 and |T| <= 50.
ScoreMatrix phi_exact(const GraphPair& pair, const ChandelierFamily& family);

struct ApproxOptions {
  std::optional<std::uint64_t> t_override;
  std::uint64_t t_cap = 10000;
  std::uint64_t seed = 0;
  double flop_budget = 1e13;
  bool use_cache = true;
  unsigned threads = 0;          // 0: hardware concurrency
  std::size_t chunk_size = 16;   // colorings per work item; fixes the summation order
};

/// t = override if given, else min(ceil(1/r), t_cap).
std::uint64_t colorings_per_side(int N, const ApproxOptions& options);

/// Rough floating-point operation count of phi_approx, checked against the budget.
double estimate_approx_flops(const GraphPair& pair, const ChandelierFamily& family, std::uint64_t t);

/// Color-coding estimate of Phi: t colorings per graph. Coloring a of A uses seed
/// derive_seed(seed, 2a) and coloring a of B uses derive_seed(seed, 2a + 1).
/// Output is independent of the thread count.
ScoreMatrix phi_approx(const GraphPair& pair, const ChandelierFamily& family, const ApproxOptions& options);

/// tau = c mu for 0 < c < 1.
double threshold_fixed(double mu, double c);

/// Half the median of the row maxima (lower median; argmax ties go to the smallest column).
double threshold_data_driven(const ScoreMatrix& scores);

/// CSV matrix at `path` plus JSON metadata at `path + ".meta.json"`.
void write_scores(const std::string& path, const ScoreMatrix& scores, std::optional<double> tau = std::nullopt);
ScoreMatrix read_scores(const std::string& path);

}  // namespace cmatch
