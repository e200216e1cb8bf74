#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cmatch/model.hpp"
#include "cmatch/trees.hpp"

namespace cmatch {

/// Symmetric weight matrix on [n] with zero diagonal, stored as a constant
/// off-diagonal offset plus a sparse residual: w_ij = offset + s_ij for i != j.
/// A centered adjacency matrix A - q is offset -q with residual 1 on edges, so
/// matrix-vector products cost O(n + |E|) instead of O(n^2).
class WeightedHost {
 public:
  WeightedHost() = default;

  /// Abar = A - q off the diagonal.
  static WeightedHost centered(const Graph& graph, double q);
  /// Row-major n x n matrix; must be symmetric. The diagonal is ignored.
  static WeightedHost from_dense(int n, std::span<const double> matrix);

  int size() const noexcept { return n_; }
  double offset() const noexcept { return offset_; }
  double weight(int i, int j) const noexcept;
  std::span<const int> residual_columns(int i) const noexcept;
  std::span<const double> residual_values(int i) const noexcept;
  bool all_zero() const noexcept { return offset_ == 0.0 && values_.empty(); }
  WeightedHost scaled(double factor) const;
  std::vector<double> dense() const;

 private:
  int n_ = 0;
  double offset_ = 0.0;
  std::vector<std::size_t> row_start_{0};
  std::vector<int> columns_;
  std::vector<double> values_;
};

/// Assignment of one of N + 1 colors to every host vertex.
struct Coloring {
  std::vector<std::uint8_t> colors;
  int N = 0;
  std::uint64_t seed = 0;

  static Coloring random(int n, int N, std::uint64_t seed);
  int width() const noexcept { return N + 1; }
};

/// Probability (N+1)!/(N+1)^{N+1} that N + 1 given vertices receive distinct colors.
double colorful_probability(int N);

inline constexpr int kMaxColorWidth = 24;

/// Masks over `width` colors grouped by popcount, with each mask's rank inside its group.
class ColorMasks {
 public:
  explicit ColorMasks(int width);
  /// Shared instance per width.
  static std::shared_ptr<const ColorMasks> for_width(int width);

  int width() const noexcept { return width_; }
  std::span<const std::uint32_t> of_size(int size) const noexcept { return by_size_[static_cast<std::size_t>(size)]; }
  std::uint32_t rank(std::uint32_t mask) const noexcept { return rank_[mask]; }

 private:
  int width_;
  std::vector<std::vector<std::uint32_t>> by_size_;
  std::vector<std::uint32_t> rank_;
};

/// DP table for one tree node: per host vertex, one value per color set whose
/// size equals the subtree size. Row-major, `columns` entries per host vertex.
struct MaskTable {
  int set_size = 0;
  std::size_t columns = 0;
  std::vector<double> values;

  double at(int vertex, std::size_t column) const noexcept {
    return values[static_cast<std::size_t>(vertex) * columns + column];
  }
};

/// Colorful tree DP over one host and one coloring.
class ColorCoder {
 public:
  ColorCoder(const WeightedHost& host, const Coloring& coloring);

  const WeightedHost& host() const noexcept { return *host_; }
  const Coloring& coloring() const noexcept { return *coloring_; }
  const ColorMasks& masks() const noexcept { return *masks_; }

  /// Single vertex: 1 on the singleton of the vertex's own color.
  MaskTable leaf() const;
  /// E[i][S] = sum_j w_ij D[j][S]: attaches a subtree below an edge.
  MaskTable extend(const MaskTable& child) const;
  /// D[i][S] = sum over S' + S'' = S with color(i) in S' of P[i][S'] E[i][S''].
  MaskTable fold(const MaskTable& partial, const MaskTable& extended) const;
  /// Table at the root of `shape`, children folded in canonical order.
  MaskTable subtree(const RootedTreeShape& shape) const;
  /// Table at the top of an M-edge wire hanging from a parent, ending at `bulb`,
  /// already extended across the parent edge.
  MaskTable branch(const RootedTreeShape& bulb, int M) const;
  /// Values on the full color set, one per host vertex.
  std::vector<double> full_set_values(const MaskTable& table) const;

 private:
  const WeightedHost* host_;
  const Coloring* coloring_;
  std::shared_ptr<const ColorMasks> masks_;
};

/// Branch tables of every bulb of a catalog for one coloring, computed once and
/// reused by every chandelier that contains the bulb.
class BulbTableCache {
 public:
  BulbTableCache(const ColorCoder& coder, const BulbCatalog& catalog, int M, bool enabled = true,
                 std::size_t memory_budget_bytes = std::size_t{1} << 31);

  std::shared_ptr<const MaskTable> branch(int bulb_id);
  std::size_t hits() const noexcept { return hits_; }
  std::size_t misses() const noexcept { return misses_; }

 private:
  const ColorCoder* coder_;
  const BulbCatalog* catalog_;
  int M_;
  bool enabled_;
  std::vector<std::shared_ptr<const MaskTable>> tables_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

/// X_{i,H} for every root i of one chandelier (divided by aut). Branches are
/// folded into the root in bulb-id order, so cached and uncached runs agree bit for bit.
std::vector<double> chandelier_colorful_counts(const ColorCoder& coder, BulbTableCache& cache,
                                               std::span<const int> bulb_ids, u128 aut);
inline std::vector<double> chandelier_colorful_counts(const ColorCoder& coder, BulbTableCache& cache,
                                                      const Chandelier& chandelier) {
  return chandelier_colorful_counts(coder, cache, chandelier.bulb_ids, chandelier.aut);
}

/// Signed count W_{i,H}: sum over copies of `shape` in K_n rooted at `root` of
/// the product of edge weights. Backtracking over injective embeddings; oracle scale only.
double exact_signed_count(const WeightedHost& host, int root, const RootedTreeShape& shape);

inline constexpr int kBacktrackMaxEdges = 6;
inline constexpr int kBacktrackMaxVertices = 40;

/// W_{i,H} for all roots via Moebius inversion of homomorphism counts over the
/// partitions of the tree's vertex set. Polynomial in n for fixed shapes.
std::vector<double> signed_counts_by_partition(const WeightedHost& host, const RootedTreeShape& shape);

inline constexpr int kPartitionMaxVertices = 9;

/// X_{i,H}(M, coloring).
double colorful_count(const WeightedHost& host, int root, const RootedTreeShape& shape, const Coloring& coloring);
std::vector<double> colorful_count_all_roots(const WeightedHost& host, const RootedTreeShape& shape,
                                             const Coloring& coloring);

}  // namespace cmatch
