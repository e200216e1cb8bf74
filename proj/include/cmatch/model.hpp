#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cmatch {

/// Simple undirected graph on [n]: packed bitset rows plus sorted neighbor lists.
/// Immutable after construction.
class Graph {
 public:
  Graph() = default;
  Graph(int n, std::span<const std::pair<int, int>> edges);

  int size() const noexcept { return n_; }
  bool has_edge(int u, int v) const noexcept {
    return (bits_[static_cast<std::size_t>(u) * words_ + (static_cast<unsigned>(v) >> 6)] >>
            (static_cast<unsigned>(v) & 63U)) & 1U;
  }
  std::span<const int> neighbors(int u) const noexcept { return adjacency_[static_cast<std::size_t>(u)]; }
  int degree(int u) const noexcept { return static_cast<int>(adjacency_[static_cast<std::size_t>(u)].size()); }
  std::span<const std::uint64_t> row_bits(int u) const noexcept {
    return {bits_.data() + static_cast<std::size_t>(u) * words_, words_};
  }
  std::size_t edge_count() const noexcept { return edge_count_; }
  /// Edges (u, v) with u < v in lexicographic order.
  std::vector<std::pair<int, int>> edges() const;
  Graph complement() const;

  friend bool operator==(const Graph& a, const Graph& b) noexcept {
    return a.n_ == b.n_ && a.bits_ == b.bits_;
  }

 private:
  int n_ = 0;
  std::size_t words_ = 0;
  std::size_t edge_count_ = 0;
  std::vector<std::uint64_t> bits_;
  std::vector<std::vector<int>> adjacency_;
};

enum class PiMode { identity, uniform };

std::string_view to_string(PiMode mode) noexcept;
PiMode parse_pi_mode(std::string_view text);

/// Joint law of (A_ij, B_pi(i)pi(j)): both marginals q, Pearson correlation rho.
struct JointCells {
  double p11, p10, p01, p00;
};

/// Smallest admissible correlation for edge density q (nonnegative cells).
double rho_min(double q);

/// Cell probabilities; throws ParameterError if a cell would be negative.
JointCells joint_cells(double q, double rho);

/// Correlated Erdos-Renyi pair. A_ij and B_{pi(i)pi(j)} are the correlated pair.
struct GraphPair {
  int n = 0;
  double q = 0.0;
  double rho = 0.0;
  std::uint64_t seed = 0;
  PiMode pi_mode = PiMode::identity;
  Graph a;
  Graph b;
  std::vector<int> pi;

  /// Pooled empirical edge density of both graphs.
  double empirical_density() const;
};

/// Samples G(n, q, rho) with 0 < q <= 1/2, rho_min(q) <= rho <= 1, n >= 2.
GraphPair sample_pair(int n, double q, double rho, PiMode pi_mode, std::uint64_t seed);

/// The complement pair is G(n, 1 - q, rho) with the same permutation.
GraphPair complement_pair(const GraphPair& pair);

/// E[sigma^{-(l+m)} Abar^l Bbar^m] for 0 <= l, m <= 2 and 2 <= l + m <= 4.
double cross_moment(int l, int m, double q, double rho);

/// Text format: header `n q rho seed pi_mode`, A edges, `%`, B edges, `%`, `i pi(i)` lines.
void write_pair(std::ostream& out, const GraphPair& pair);
GraphPair read_pair(std::istream& in);
GraphPair read_pair_file(const std::string& path);
void write_pair_file(const std::string& path, const GraphPair& pair);

}  // namespace cmatch
