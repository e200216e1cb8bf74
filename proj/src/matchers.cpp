#include "cmatch/matchers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "cmatch/errors.hpp"

namespace cmatch {

PartialMatching::PartialMatching(int n)
    : target_(static_cast<std::size_t>(n), -1), source_(static_cast<std::size_t>(n), -1) {}

void PartialMatching::assign(int i, int j) {
  if (i < 0 || j < 0 || i >= universe() || j >= universe()) throw ParameterError("matching pair out of range");
  if (matched_source(i) || matched_target(j))
    throw ParameterError("matching is not injective at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  target_[static_cast<std::size_t>(i)] = j;
  source_[static_cast<std::size_t>(j)] = i;
  ++size_;
}

std::vector<std::pair<int, int>> PartialMatching::pairs() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(size_);
  for (int i = 0; i < universe(); ++i)
    if (auto j = at(i)) out.emplace_back(i, *j);
  return out;
}

PartialMatching match_by_threshold(const ScoreMatrix& scores, double tau) {
  const int n = scores.n;
  std::vector<int> choice(static_cast<std::size_t>(n), -1);
  std::vector<int> claims(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const auto row = scores.row(i);
    int found = -1;
    int count = 0;
    for (int j = 0; j < n && count < 2; ++j) {
      if (row[static_cast<std::size_t>(j)] >= tau) {
        found = j;
        ++count;
      }
    }
    if (count == 1) {
      choice[static_cast<std::size_t>(i)] = found;
      ++claims[static_cast<std::size_t>(found)];
    }
  }
  PartialMatching out(n);
  for (int i = 0; i < n; ++i) {
    const int j = choice[static_cast<std::size_t>(i)];
    if (j >= 0 && claims[static_cast<std::size_t>(j)] == 1) out.assign(i, j);
  }
  return out;
}

double rate_h(double x) {
  if (!(x > 0.0)) throw ParameterError("h(x) needs x > 0");
  return x * std::log(x) - x + 1.0;
}

double solve_gamma(double target) {
  if (!(target > 0.0) || !std::isfinite(target)) throw ParameterError("solve_gamma needs a finite target > 0");
  double lo = 1.0;
  double hi = std::max(std::exp(1.0), target + std::exp(1.0));
  while (rate_h(hi) < target) hi *= 2.0;
  // h is increasing on (1, inf); bisect until the bracket stops shrinking.
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (rate_h(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  const double h_lo = std::abs(rate_h(lo) - target);
  const double h_hi = std::abs(rate_h(hi) - target);
  const double gamma = (h_lo < h_hi && lo > 1.0) ? lo : hi;
  return gamma;
}

double seeded_gamma(int n, double q) {
  if (n < 3) throw ParameterError("seeded matching needs n >= 3");
  if (!(q > 0.0)) throw ParameterError("seeded matching needs q > 0");
  return solve_gamma(3.0 * std::log(static_cast<double>(n)) / ((n - 2) * q * q));
}

namespace {

class DenseCounters {
 public:
  explicit DenseCounters(int n) : n_(static_cast<std::size_t>(n)), counts_(n_ * n_, 0) {}
  std::uint32_t increment(int i, int j) { return ++counts_[static_cast<std::size_t>(i) * n_ + static_cast<std::size_t>(j)]; }
  std::uint32_t get(int i, int j) const { return counts_[static_cast<std::size_t>(i) * n_ + static_cast<std::size_t>(j)]; }

 private:
  std::size_t n_;
  std::vector<std::uint32_t> counts_;
};

class SparseCounters {
 public:
  explicit SparseCounters(int n) : n_(static_cast<std::uint64_t>(n)) {}
  std::uint32_t increment(int i, int j) { return ++counts_[key(i, j)]; }
  std::uint32_t get(int i, int j) const {
    const auto it = counts_.find(key(i, j));
    return it == counts_.end() ? 0 : it->second;
  }

 private:
  std::uint64_t key(int i, int j) const { return static_cast<std::uint64_t>(i) * n_ + static_cast<std::uint64_t>(j); }
  std::uint64_t n_;
  std::unordered_map<std::uint64_t, std::uint32_t> counts_;
};

template <typename Counters>
PartialMatching percolate(const Graph& a, const Graph& b, const PartialMatching& seeds, double threshold,
                          SeededStats* stats) {
  const int n = a.size();
  PartialMatching current = seeds;
  Counters counters(n);
  std::deque<std::pair<int, int>> frontier;
  std::vector<std::pair<int, int>> crossed;
  // Counts only increase, so a pair is queued exactly when it first reaches the threshold.
  const auto needed = static_cast<std::uint32_t>(std::max(1.0, std::ceil(threshold - 1e-9)));

  auto witness = [&](int u) {
    const int image = *current.at(u);
    crossed.clear();
    for (int i : a.neighbors(u)) {
      if (current.matched_source(i)) continue;
      for (int j : b.neighbors(image)) {
        if (current.matched_target(j)) continue;
        if (counters.increment(i, j) == needed) crossed.emplace_back(i, j);
      }
    }
    std::sort(crossed.begin(), crossed.end());
    frontier.insert(frontier.end(), crossed.begin(), crossed.end());
  };

  for (int u = 0; u < n; ++u)
    if (current.matched_source(u)) witness(u);

  std::size_t added = 0;
  while (!frontier.empty()) {
    const auto [i, j] = frontier.front();
    frontier.pop_front();
    if (current.matched_source(i) || current.matched_target(j)) continue;
    current.assign(i, j);
    ++added;
    witness(i);
  }
  if (stats) {
    stats->added = added;
    stats->threshold = threshold;
  }
  return current;
}

}  // namespace

PartialMatching seeded_match(const Graph& a, const Graph& b, const PartialMatching& seeds, double q, double gamma,
                             SeededStats* stats) {
  const int n = a.size();
  if (b.size() != n || seeds.universe() != n) throw ParameterError("graphs and seeds disagree on n");
  if (!(q > 0.0)) throw ParameterError("seeded matching needs q > 0");
  const double threshold = gamma * (n - 2) * q * q;
  if (n <= kDenseCounterLimit) return percolate<DenseCounters>(a, b, seeds, threshold, stats);
  return percolate<SparseCounters>(a, b, seeds, threshold, stats);
}

MatchMetrics evaluate(const PartialMatching& matching, std::span<const int> truth) {
  if (static_cast<std::size_t>(matching.universe()) != truth.size())
    throw ParameterError("matching and ground truth disagree on n");
  MatchMetrics m;
  for (int i = 0; i < matching.universe(); ++i) {
    if (auto j = matching.at(i)) {
      ++m.matched;
      if (*j == truth[static_cast<std::size_t>(i)]) ++m.correct;
    }
  }
  const double n = static_cast<double>(truth.size());
  m.precision = m.matched == 0 ? 1.0 : static_cast<double>(m.correct) / static_cast<double>(m.matched);
  m.coverage = n == 0 ? 0.0 : static_cast<double>(m.matched) / n;
  m.accuracy = n == 0 ? 0.0 : static_cast<double>(m.correct) / n;
  m.exact = m.correct == truth.size();
  return m;
}

void write_matching(std::ostream& out, const PartialMatching& matching) {
  for (auto [i, j] : matching.pairs()) out << i << ' ' << j << '\n';
}

PartialMatching read_matching(std::istream& in, int n) {
  PartialMatching out(n);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    int i = 0;
    int j = 0;
    if (!(fields >> i >> j)) throw FormatError("matching file: bad line " + std::to_string(line_no));
    out.assign(i, j);
  }
  return out;
}

PartialMatching read_matching_file(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open matching file '" + path + "'");
  return read_matching(in, n);
}

}  // namespace cmatch
