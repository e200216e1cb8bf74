#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmatch/model.hpp"
#include "cmatch/score.hpp"

namespace cmatch {

/// Injective partial map from vertices of A to vertices of B.
class PartialMatching {
 public:
  PartialMatching() = default;
  explicit PartialMatching(int n);

  int universe() const noexcept { return static_cast<int>(target_.size()); }
  std::optional<int> at(int i) const noexcept {
    const int j = target_[static_cast<std::size_t>(i)];
    return j < 0 ? std::nullopt : std::optional<int>(j);
  }
  bool matched_source(int i) const noexcept { return target_[static_cast<std::size_t>(i)] >= 0; }
  bool matched_target(int j) const noexcept { return source_[static_cast<std::size_t>(j)] >= 0; }
  /// Throws ParameterError if i or j is already matched.
  void assign(int i, int j);
  std::size_t size() const noexcept { return size_; }
  std::vector<std::pair<int, int>> pairs() const;

  friend bool operator==(const PartialMatching& a, const PartialMatching& b) noexcept {
    return a.target_ == b.target_;
  }

 private:
  std::vector<int> target_;
  std::vector<int> source_;
  std::size_t size_ = 0;
};

/// Row i is matched to j iff j is the only column with score >= tau; rows whose
/// unique columns collide are all dropped.
PartialMatching match_by_threshold(const ScoreMatrix& scores, double tau);

/// h(x) = x log x - x + 1.
double rate_h(double x);

/// The root of h(gamma) = target in (1, inf), |h(gamma) - target| <= 1e-12.
double solve_gamma(double target);

/// gamma for seeded matching at size n and density q: h(gamma) = 3 log n / ((n - 2) q^2).
double seeded_gamma(int n, double q);

struct SeededStats {
  std::size_t added = 0;
  double threshold = 0.0;
};

/// Percolation from correct seeds: repeatedly match any unmatched (i, j) whose
/// seed-witnessed common-neighbor count reaches gamma (n - 2) q^2. Qualifying
/// pairs are processed first-in first-out; pairs that qualify at the same time
/// enter the queue in lexicographic order.
PartialMatching seeded_match(const Graph& a, const Graph& b, const PartialMatching& seeds, double q, double gamma,
                             SeededStats* stats = nullptr);

/// Counter matrices at or below this size are dense; larger ones are hashed.
inline constexpr int kDenseCounterLimit = 5000;

struct MatchMetrics {
  double precision = 0.0;  // fraction of the domain matched correctly (1 on an empty domain)
  double coverage = 0.0;   // |I| / n
  double accuracy = 0.0;   // correctly matched vertices / n
  bool exact = false;
  std::size_t correct = 0;
  std::size_t matched = 0;
};

/// Compares i -> matching(i) against i -> truth[i].
MatchMetrics evaluate(const PartialMatching& matching, std::span<const int> truth);

/// `i j` lines.
void write_matching(std::ostream& out, const PartialMatching& matching);
PartialMatching read_matching(std::istream& in, int n);
PartialMatching read_matching_file(const std::string& path, int n);

}  // namespace cmatch
