#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cmatch {

using u128 = unsigned __int128;

/// Automorphism cap meaning "no cap".
inline constexpr u128 kUnboundedAut = ~u128{0};

/// Otter's constant: the number of unlabeled rooted trees grows like alpha^{-K}.
inline constexpr double kOtterAlpha = 0.3383218568992077;

/// Decimal text; the unbounded cap prints as "inf".
std::string to_string(u128 value);
u128 parse_u128(std::string_view text);

/// Unlabeled rooted tree stored as its canonical level sequence.
///
/// The canonical sequence lists vertex depths in preorder with the children of
/// every vertex ordered by decreasing canonical subsequence, which makes it the
/// lexicographically largest level sequence of the tree. Two shapes are equal
/// exactly when the rooted trees are isomorphic.
class RootedTreeShape {
 public:
  /// The single-vertex tree.
  RootedTreeShape() = default;

  /// Canonicalizes any valid level sequence (first entry 0, each step rises by at most 1).
  static RootedTreeShape from_levels(std::span<const int> levels);
  /// `parents[0] == -1` is the root; every other parent index precedes its child.
  static RootedTreeShape from_parents(std::span<const int> parents);
  static RootedTreeShape from_adjacency(const std::vector<std::vector<int>>& adjacency, int root);

  const std::vector<int>& levels() const noexcept { return levels_; }
  int edges() const noexcept { return static_cast<int>(levels_.size()) - 1; }
  int vertices() const noexcept { return static_cast<int>(levels_.size()); }
  u128 aut() const noexcept { return aut_; }

  /// Parent of each vertex in level-sequence (preorder) numbering; -1 for the root.
  std::vector<int> parents() const;
  std::vector<std::vector<int>> children() const;
  std::vector<std::vector<int>> adjacency() const;

  std::string levels_string() const;

  friend bool operator==(const RootedTreeShape& a, const RootedTreeShape& b) noexcept {
    return a.levels_ == b.levels_;
  }
  friend std::strong_ordering operator<=>(const RootedTreeShape& a, const RootedTreeShape& b) noexcept {
    return a.levels_ <=> b.levels_;
  }

 private:
  RootedTreeShape(std::vector<int> canonical, u128 aut) : levels_(std::move(canonical)), aut_(aut) {}
  friend class RootedTreeEnumerator;

  std::vector<int> levels_{0};
  u128 aut_ = 1;
};

/// Canonical level sequence of the tree given by `adjacency`, rooted at `root`.
std::vector<int> canonical_levels(const std::vector<std::vector<int>>& adjacency, int root);

/// Product over vertices of the factorials of identical-child multiplicities.
/// Expects a canonical sequence; throws CapError on 128-bit overflow.
u128 automorphism_count(std::span<const int> canonical);

inline constexpr int kMaxEnumerationEdges = 20;
inline constexpr int kMaxCountEdges = 2000;

/// Constant-amortized successor enumeration of rooted trees with a fixed edge
/// count, from the path down to the star, in decreasing canonical order.
class RootedTreeEnumerator {
 public:
  explicit RootedTreeEnumerator(int edges);
  std::optional<RootedTreeShape> next();

 private:
  std::vector<int> current_;
  bool done_ = false;
};

std::vector<RootedTreeShape> enumerate_rooted_trees(int edges);

/// Number of unlabeled rooted trees with `edges` edges (Euler-transform recurrence).
boost::multiprecision::cpp_int count_rooted_trees(int edges);

/// count(k_max) / count(k_max - 1), which tends to 1/alpha. Needs k_max >= 50.
double estimate_otter(int k_max);

/// True iff re-rooting at any other vertex gives a non-isomorphic rooted tree.
bool is_uniquely_rooted(const RootedTreeShape& shape);

/// Rooted trees with K edges and at most R automorphisms, in enumeration order.
struct BulbCatalog {
  int K = 0;
  u128 R = kUnboundedAut;
  std::vector<RootedTreeShape> bulbs;
  std::size_t unfiltered = 0;  // |J(K)|
  std::string warning;

  std::size_t size() const noexcept { return bulbs.size(); }
  double retained_fraction() const noexcept {
    return unfiltered == 0 ? 0.0 : static_cast<double>(bulbs.size()) / static_cast<double>(unfiltered);
  }
};

BulbCatalog build_catalog(int K, u128 R);

/// Root with L branches; each branch is an M-edge wire from the root to the
/// root of a K-edge bulb. Bulbs are pairwise distinct catalog entries.
struct Chandelier {
  std::vector<int> bulb_ids;
  int K = 0;
  int M = 0;
  RootedTreeShape realized;
  u128 aut = 1;

  int L() const noexcept { return static_cast<int>(bulb_ids.size()); }
  int edges() const noexcept { return (K + M) * L(); }
};

Chandelier make_chandelier(const BulbCatalog& catalog, std::vector<int> bulb_ids, int M);

/// n choose k, throws CapError on 64-bit overflow.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// All (L, M, K, R)-chandeliers over a catalog, in lexicographic order of bulb
/// subsets. Chandeliers are produced on demand from a rank or a cursor.
class ChandelierFamily {
 public:
  ChandelierFamily(std::shared_ptr<const BulbCatalog> catalog, int L, int M);

  int K() const noexcept { return catalog_->K; }
  int L() const noexcept { return L_; }
  int M() const noexcept { return M_; }
  u128 R() const noexcept { return catalog_->R; }
  int N() const noexcept { return (K() + M_) * L_; }
  std::uint64_t size() const noexcept { return size_; }
  const BulbCatalog& catalog() const noexcept { return *catalog_; }
  bool uniquely_rooted_guaranteed() const noexcept { return L_ >= 2; }

  std::vector<int> subset(std::uint64_t rank) const;
  Chandelier at(std::uint64_t rank) const { return make_chandelier(*catalog_, subset(rank), M_); }
  std::vector<Chandelier> materialize() const;

  /// Independent forward iterator over bulb subsets starting at `rank`.
  class Cursor {
   public:
    Cursor(const ChandelierFamily& family, std::uint64_t rank);
    bool done() const noexcept { return done_; }
    const std::vector<int>& subset() const noexcept { return subset_; }
    std::uint64_t rank() const noexcept { return rank_; }
    void advance();

   private:
    int universe_;
    std::vector<int> subset_;
    std::uint64_t rank_;
    bool done_;
  };

  Cursor cursor(std::uint64_t rank = 0) const { return Cursor(*this, rank); }

 private:
  std::shared_ptr<const BulbCatalog> catalog_;
  int L_;
  int M_;
  std::uint64_t size_;
};

inline constexpr int kDefaultWidthCap = 24;

ChandelierFamily build_family(int K, int L, int M, u128 R, int width_cap = kDefaultWidthCap);
ChandelierFamily build_family(std::shared_ptr<const BulbCatalog> catalog, int L, int M,
                              int width_cap = kDefaultWidthCap);

/// Expected true-pair score |T| (rho sigma^2)^N (n-1)!/(n-N-1)!, sigma^2 = q(1-q).
/// Throws ParameterError when rho < 0 and N is odd.
double chandelier_mean(std::uint64_t family_size, int n, int N, double q, double rho);

/// Constants of the parameter recipe (C1..C4) and of the general feasibility
/// condition (c1..c6). The recipe constants are existence-only in theory; the
/// defaults land K in [2, 5] for n between 10 and 100.
struct ParameterConstants {
  double C1 = 2.0;
  double C2 = 1.0;
  double C3 = 1.0;
  double C4 = 0.5;
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
  double c4 = 1.0;
  double c5 = 1.0;
  double c6 = 1.0;
};

struct ClauseCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct ParameterChoice {
  int K = 0;
  int L = 0;
  int M = 0;
  int N = 0;
  u128 R = 1;
  std::size_t catalog_size = 0;
  std::size_t unfiltered_catalog_size = 0;
  double retained_fraction = 0.0;
  std::uint64_t family_size = 0;
  double sigma2 = 0.0;
  double mu = 0.0;
  bool correlation_condition = false;  // rho^2 >= alpha + epsilon
  std::vector<ClauseCheck> clauses;
  bool feasible = false;
  std::string warning;
};

ParameterChoice select_parameters(int n, double q, double rho, double epsilon,
                                  const ParameterConstants& constants = {});

}  // namespace cmatch
