#include "cmatch/trees.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "cmatch/errors.hpp"

namespace cmatch {

namespace {

using boost::multiprecision::cpp_int;

u128 checked_mul(u128 a, u128 b) {
  u128 out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw CapError("automorphism count overflows 128 bits");
  return out;
}

void validate_levels(std::span<const int> levels) {
  if (levels.empty() || levels[0] != 0) throw ParameterError("level sequence must start with the root at depth 0");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] < 1 || levels[i] > levels[i - 1] + 1)
      throw ParameterError("invalid level sequence at position " + std::to_string(i));
  }
}

std::vector<int> parents_from_levels(std::span<const int> levels) {
  std::vector<int> parents(levels.size(), -1);
  std::vector<int> last_at_depth(levels.size() + 1, -1);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto depth = static_cast<std::size_t>(levels[i]);
    if (depth > 0) parents[i] = last_at_depth[depth - 1];
    last_at_depth[depth] = static_cast<int>(i);
  }
  return parents;
}

std::vector<int> encode(const std::vector<std::vector<int>>& children, int v) {
  std::vector<std::vector<int>> parts;
  parts.reserve(children[static_cast<std::size_t>(v)].size());
  for (int c : children[static_cast<std::size_t>(v)]) parts.push_back(encode(children, c));
  std::sort(parts.begin(), parts.end(), std::greater<>());
  std::vector<int> out{0};
  for (const auto& part : parts)
    for (int depth : part) out.push_back(depth + 1);
  return out;
}

std::vector<std::vector<int>> children_from_parents(std::span<const int> parents) {
  std::vector<std::vector<int>> children(parents.size());
  for (std::size_t i = 1; i < parents.size(); ++i) children[static_cast<std::size_t>(parents[i])].push_back(static_cast<int>(i));
  return children;
}

}  // namespace

std::string to_string(u128 value) {
  if (value == 0) return "0";
  if (value == kUnboundedAut) return "inf";
  std::string out;
  while (value != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

u128 parse_u128(std::string_view text) {
  if (text == "inf" || text == "infinity" || text == "unbounded") return kUnboundedAut;
  if (text.empty()) throw ParameterError("empty integer");
  u128 value = 0;
  for (char ch : text) {
    if (ch < '0' || ch > '9') throw ParameterError("not an unsigned integer: '" + std::string(text) + "'");
    value = checked_mul(value, 10) + static_cast<u128>(ch - '0');
  }
  return value;
}

std::vector<int> canonical_levels(const std::vector<std::vector<int>>& adjacency, int root) {
  const auto n = adjacency.size();
  if (root < 0 || static_cast<std::size_t>(root) >= n) throw ParameterError("root out of range");
  std::vector<std::vector<int>> children(n);
  std::vector<int> parent(n, -2);
  std::vector<int> stack{root};
  parent[static_cast<std::size_t>(root)] = -1;
  std::size_t seen = 0;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    ++seen;
    for (int w : adjacency[static_cast<std::size_t>(u)]) {
      if (w == parent[static_cast<std::size_t>(u)]) continue;
      if (parent[static_cast<std::size_t>(w)] != -2) throw ParameterError("adjacency does not describe a tree");
      parent[static_cast<std::size_t>(w)] = u;
      children[static_cast<std::size_t>(u)].push_back(w);
      stack.push_back(w);
    }
  }
  if (seen != n) throw ParameterError("adjacency does not describe a connected tree");
  return encode(children, root);
}

u128 automorphism_count(std::span<const int> canonical) {
  const std::size_t n = canonical.size();
  // end[v]: one past the last vertex of v's subtree in preorder
  std::vector<std::size_t> end(n, n);
  {
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < n; ++i) {
      while (!open.empty() && canonical[open.back()] >= canonical[i]) {
        end[open.back()] = i;
        open.pop_back();
      }
      open.push_back(i);
    }
  }
  auto same_subtree = [&](std::size_t a, std::size_t b) {
    return end[a] - a == end[b] - b && std::equal(canonical.begin() + static_cast<std::ptrdiff_t>(a),
                                                  canonical.begin() + static_cast<std::ptrdiff_t>(end[a]),
                                                  canonical.begin() + static_cast<std::ptrdiff_t>(b));
  };

  u128 aut = 1;
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t run = 0;
    std::size_t prev = n;
    for (std::size_t c = v + 1; c < end[v]; c = end[c]) {
      if (prev != n && same_subtree(prev, c)) {
        ++run;
        aut = checked_mul(aut, run);
      } else {
        run = 1;
      }
      prev = c;
    }
  }
  return aut;
}

RootedTreeShape RootedTreeShape::from_levels(std::span<const int> levels) {
  validate_levels(levels);
  const auto parents = parents_from_levels(levels);
  auto canonical = encode(children_from_parents(parents), 0);
  const u128 aut = automorphism_count(canonical);
  return RootedTreeShape(std::move(canonical), aut);
}

RootedTreeShape RootedTreeShape::from_parents(std::span<const int> parents) {
  if (parents.empty() || parents[0] != -1) throw ParameterError("parents[0] must be -1 (root)");
  for (std::size_t i = 1; i < parents.size(); ++i)
    if (parents[i] < 0 || static_cast<std::size_t>(parents[i]) >= i)
      throw ParameterError("each parent must precede its child");
  auto canonical = encode(children_from_parents(parents), 0);
  const u128 aut = automorphism_count(canonical);
  return RootedTreeShape(std::move(canonical), aut);
}

RootedTreeShape RootedTreeShape::from_adjacency(const std::vector<std::vector<int>>& adjacency, int root) {
  auto canonical = canonical_levels(adjacency, root);
  const u128 aut = automorphism_count(canonical);
  return RootedTreeShape(std::move(canonical), aut);
}

std::vector<int> RootedTreeShape::parents() const { return parents_from_levels(levels_); }

std::vector<std::vector<int>> RootedTreeShape::children() const { return children_from_parents(parents()); }

std::vector<std::vector<int>> RootedTreeShape::adjacency() const {
  const auto parent = parents();
  std::vector<std::vector<int>> adj(parent.size());
  for (std::size_t i = 1; i < parent.size(); ++i) {
    adj[i].push_back(parent[i]);
    adj[static_cast<std::size_t>(parent[i])].push_back(static_cast<int>(i));
  }
  return adj;
}

std::string RootedTreeShape::levels_string() const {
  std::string out;
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(levels_[i]);
  }
  return out;
}

RootedTreeEnumerator::RootedTreeEnumerator(int edges) {
  if (edges < 0) throw ParameterError("edge count must be nonnegative");
  if (edges > kMaxEnumerationEdges)
    throw CapError("rooted tree enumeration is capped at " + std::to_string(kMaxEnumerationEdges) + " edges");
  current_.resize(static_cast<std::size_t>(edges) + 1);
  for (std::size_t i = 0; i < current_.size(); ++i) current_[i] = static_cast<int>(i);
}

std::optional<RootedTreeShape> RootedTreeEnumerator::next() {
  if (done_) return std::nullopt;
  RootedTreeShape shape(current_, automorphism_count(current_));

  std::ptrdiff_t p = static_cast<std::ptrdiff_t>(current_.size()) - 1;
  while (p > 0 && current_[static_cast<std::size_t>(p)] <= 1) --p;
  if (p <= 0) {
    done_ = true;
  } else {
    std::ptrdiff_t q = p - 1;
    while (current_[static_cast<std::size_t>(q)] != current_[static_cast<std::size_t>(p)] - 1) --q;
    const std::ptrdiff_t shift = p - q;
    for (auto i = p; i < static_cast<std::ptrdiff_t>(current_.size()); ++i)
      current_[static_cast<std::size_t>(i)] = current_[static_cast<std::size_t>(i - shift)];
  }
  return shape;
}

std::vector<RootedTreeShape> enumerate_rooted_trees(int edges) {
  std::vector<RootedTreeShape> out;
  RootedTreeEnumerator it(edges);
  while (auto shape = it.next()) out.push_back(std::move(*shape));
  return out;
}

cpp_int count_rooted_trees(int edges) {
  if (edges < 0) throw ParameterError("edge count must be nonnegative");
  if (edges > kMaxCountEdges) throw CapError("rooted tree counting is capped at " + std::to_string(kMaxCountEdges) + " edges");
  // t[m]: rooted trees on m vertices; s[k] = sum_{d | k} d t[d].
  const std::size_t target = static_cast<std::size_t>(edges) + 1;
  std::vector<cpp_int> t(target + 1);
  std::vector<cpp_int> s(target + 1);
  t[1] = 1;
  for (std::size_t k = 1; k <= target; k += 1) s[k] += 1;  // d = 1 contributes 1 * t[1]
  for (std::size_t m = 1; m < target; ++m) {
    cpp_int acc = 0;
    for (std::size_t k = 1; k <= m; ++k) acc += s[k] * t[m - k + 1];
    t[m + 1] = acc / m;
    const std::size_t d = m + 1;
    const cpp_int contribution = t[d] * d;
    for (std::size_t k = d; k <= target; k += d) s[k] += contribution;
  }
  return t[target];
}

double estimate_otter(int k_max) {
  if (k_max < 50) throw ParameterError("k_max must be >= 50");
  const cpp_int num = count_rooted_trees(k_max);
  const cpp_int den = count_rooted_trees(k_max - 1);
  const auto bits = static_cast<unsigned>(boost::multiprecision::msb(den));
  const unsigned shift = bits > 62 ? bits - 62 : 0;
  const cpp_int a = num >> shift;
  const cpp_int b = den >> shift;
  return a.convert_to<double>() / b.convert_to<double>();
}

bool is_uniquely_rooted(const RootedTreeShape& shape) {
  if (shape.edges() > 30) throw CapError("is_uniquely_rooted is capped at 30 edges");
  const auto adj = shape.adjacency();
  for (int v = 1; v < shape.vertices(); ++v)
    if (canonical_levels(adj, v) == shape.levels()) return false;
  return true;
}

BulbCatalog build_catalog(int K, u128 R) {
  BulbCatalog catalog;
  catalog.K = K;
  catalog.R = R;
  RootedTreeEnumerator it(K);
  while (auto shape = it.next()) {
    ++catalog.unfiltered;
    if (shape->aut() <= R) catalog.bulbs.push_back(std::move(*shape));
  }
  if (catalog.bulbs.empty())
    catalog.warning = "empty bulb catalog: R = " + to_string(R) + " is below the smallest automorphism count 1";
  return catalog;
}

Chandelier make_chandelier(const BulbCatalog& catalog, std::vector<int> bulb_ids, int M) {
  if (M < 1) throw ParameterError("wire length M must be >= 1");
  if (bulb_ids.empty()) throw ParameterError("a chandelier needs at least one bulb");
  for (std::size_t i = 0; i < bulb_ids.size(); ++i) {
    if (bulb_ids[i] < 0 || static_cast<std::size_t>(bulb_ids[i]) >= catalog.size())
      throw ParameterError("bulb id out of range");
    if (i > 0 && bulb_ids[i] <= bulb_ids[i - 1]) throw ParameterError("bulb ids must be strictly increasing");
  }

  std::vector<int> parents{-1};
  u128 aut = 1;
  for (int id : bulb_ids) {
    const RootedTreeShape& bulb = catalog.bulbs[static_cast<std::size_t>(id)];
    aut = checked_mul(aut, bulb.aut());
    int prev = 0;
    for (int w = 1; w < M; ++w) {
      parents.push_back(prev);
      prev = static_cast<int>(parents.size()) - 1;
    }
    const auto bulb_parents = bulb.parents();
    const int base = static_cast<int>(parents.size());
    parents.push_back(prev);
    for (std::size_t k = 1; k < bulb_parents.size(); ++k) parents.push_back(base + bulb_parents[k]);
  }

  Chandelier ch;
  ch.bulb_ids = std::move(bulb_ids);
  ch.K = catalog.K;
  ch.M = M;
  ch.realized = RootedTreeShape::from_parents(parents);
  ch.aut = aut;
  if (ch.realized.aut() != aut) throw InvariantError("chandelier automorphisms differ from the product over bulbs");
  return ch;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  u128 value = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    value = value * (n - i) / (i + 1);
    if (value > std::numeric_limits<std::uint64_t>::max()) throw CapError("binomial coefficient overflows 64 bits");
  }
  return static_cast<std::uint64_t>(value);
}

ChandelierFamily::ChandelierFamily(std::shared_ptr<const BulbCatalog> catalog, int L, int M)
    : catalog_(std::move(catalog)), L_(L), M_(M), size_(0) {
  if (!catalog_) throw ParameterError("null bulb catalog");
  if (L < 1) throw ParameterError("L must be >= 1");
  if (M < 1) throw ParameterError("M must be >= 1");
  if (static_cast<std::size_t>(L) > catalog_->size())
    throw ParameterError("insufficient bulbs: L = " + std::to_string(L) + " exceeds |J(K,R)| = " +
                         std::to_string(catalog_->size()));
  size_ = binomial(catalog_->size(), static_cast<std::uint64_t>(L));
}

std::vector<int> ChandelierFamily::subset(std::uint64_t rank) const {
  if (rank >= size_) throw ParameterError("chandelier rank out of range");
  const auto universe = static_cast<std::uint64_t>(catalog_->size());
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(L_));
  std::uint64_t c = 0;
  for (int pos = 0; pos < L_; ++pos) {
    const auto remaining = static_cast<std::uint64_t>(L_ - pos - 1);
    for (;; ++c) {
      const std::uint64_t with_c = binomial(universe - c - 1, remaining);
      if (rank < with_c) break;
      rank -= with_c;
    }
    out.push_back(static_cast<int>(c));
    ++c;
  }
  return out;
}

std::vector<Chandelier> ChandelierFamily::materialize() const {
  std::vector<Chandelier> out;
  out.reserve(static_cast<std::size_t>(size_));
  for (auto cur = cursor(); !cur.done(); cur.advance()) out.push_back(make_chandelier(*catalog_, cur.subset(), M_));
  return out;
}

ChandelierFamily::Cursor::Cursor(const ChandelierFamily& family, std::uint64_t rank)
    : universe_(static_cast<int>(family.catalog().size())), rank_(rank), done_(rank >= family.size()) {
  if (!done_) subset_ = family.subset(rank);
}

void ChandelierFamily::Cursor::advance() {
  if (done_) return;
  const int L = static_cast<int>(subset_.size());
  int i = L - 1;
  while (i >= 0 && subset_[static_cast<std::size_t>(i)] == universe_ - L + i) --i;
  if (i < 0) {
    done_ = true;
    ++rank_;
    return;
  }
  ++subset_[static_cast<std::size_t>(i)];
  for (int j = i + 1; j < L; ++j) subset_[static_cast<std::size_t>(j)] = subset_[static_cast<std::size_t>(j - 1)] + 1;
  ++rank_;
}

ChandelierFamily build_family(std::shared_ptr<const BulbCatalog> catalog, int L, int M, int width_cap) {
  if (!catalog) throw ParameterError("null bulb catalog");
  const int N = (catalog->K + M) * L;
  if (N + 1 > width_cap)
    throw CapError("chandelier has N + 1 = " + std::to_string(N + 1) + " vertices, above the color width cap " +
                   std::to_string(width_cap));
  return ChandelierFamily(std::move(catalog), L, M);
}

ChandelierFamily build_family(int K, int L, int M, u128 R, int width_cap) {
  if (L >= 1 && M >= 1 && (K + M) * L + 1 > width_cap)
    throw CapError("chandelier has N + 1 = " + std::to_string((K + M) * L + 1) +
                   " vertices, above the color width cap " + std::to_string(width_cap));
  return build_family(std::make_shared<const BulbCatalog>(build_catalog(K, R)), L, M, width_cap);
}

double chandelier_mean(std::uint64_t family_size, int n, int N, double q, double rho) {
  if (N < 0) throw ParameterError("N must be nonnegative");
  if (rho < 0.0 && N % 2 != 0) throw ParameterError("N must be even when rho < 0 so that mu >= 0");
  const double sigma2 = q * (1.0 - q);
  double falling = 1.0;
  for (int k = 1; k <= N; ++k) falling *= static_cast<double>(n - k);
  if (N >= n) falling = 0.0;
  return static_cast<double>(family_size) * std::pow(rho * sigma2, N) * falling;
}

ParameterChoice select_parameters(int n, double q, double rho, double epsilon, const ParameterConstants& c) {
  if (n < 3) throw ParameterError("n must be >= 3");
  if (!(q > 0.0 && q <= 0.5)) throw ParameterError("q must lie in (0, 1/2]");
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  const double nq = n * q;
  if (!(nq > 1.0)) throw ParameterError("the parameter recipe needs nq > 1");
  const double log_n = std::log(static_cast<double>(n));

  ParameterChoice out;
  out.L = std::max(1, static_cast<int>(std::lround(c.C1 / epsilon)));
  out.K = std::max(1, static_cast<int>(std::lround(c.C2 * log_n)));
  out.M = std::max(1, static_cast<int>(std::lround(c.C3 * out.K / std::log(nq))));
  if (((out.K + out.M) * out.L) % 2 != 0) ++out.M;
  out.N = (out.K + out.M) * out.L;
  const double r_real = std::floor(std::exp(c.C4 * out.K));
  out.R = r_real >= 1.7e38 ? kUnboundedAut : static_cast<u128>(r_real);

  const BulbCatalog catalog = build_catalog(out.K, out.R);
  out.catalog_size = catalog.size();
  out.unfiltered_catalog_size = catalog.unfiltered;
  out.retained_fraction = catalog.retained_fraction();
  out.family_size = binomial(catalog.size(), static_cast<std::uint64_t>(out.L));
  out.sigma2 = q * (1.0 - q);
  out.mu = chandelier_mean(out.family_size, n, out.N, q, rho);
  out.correlation_condition = rho * rho >= kOtterAlpha + epsilon;

  const double inf = std::numeric_limits<double>::infinity();
  const double rho2 = rho * rho;
  const double log_ratio = rho2 > 0.0 ? std::log(rho2 / kOtterAlpha) : -inf;
  const double log_loglog = std::log(log_n);
  const double ratio_mk = static_cast<double>(out.M) / out.K;

  auto add = [&](std::string name, double lhs, double rhs, bool holds) {
    out.clauses.push_back({std::move(name), lhs, rhs, holds});
  };
  const double l_cap1 = log_loglog > 0.0 ? c.c1 * log_n / log_loglog : inf;
  add("L <= c1 log n / log log n", out.L, l_cap1, out.L <= l_cap1);
  add("L <= c6 sqrt(nq)", out.L, c.c6 * std::sqrt(nq), out.L <= c.c6 * std::sqrt(nq));
  add("M/K >= c2 / log(nq)", ratio_mk, c.c2 / std::log(nq), ratio_mk >= c.c2 / std::log(nq));
  const double mk_cap = rho2 >= 1.0 ? inf : (rho2 > 0.0 ? log_ratio / (2.0 * std::log(1.0 / rho2)) : -inf);
  add("M/K <= log(rho^2/alpha) / (2 log(1/rho^2))", ratio_mk, mk_cap, ratio_mk <= mk_cap);
  const double kl_floor = log_ratio > 0.0 ? c.c3 * log_n / log_ratio : inf;
  add("KL >= c3 log n / log(rho^2/alpha)", static_cast<double>(out.K) * out.L, kl_floor,
      static_cast<double>(out.K) * out.L >= kl_floor);
  add("K + M <= c4 log n", out.K + out.M, c.c4 * log_n, out.K + out.M <= c.c4 * log_n);
  add("log R <= c5 K", std::log(std::max(1.0, r_real)), c.c5 * out.K, std::log(std::max(1.0, r_real)) <= c.c5 * out.K);
  add("L <= |J(K,R)|", out.L, static_cast<double>(catalog.size()), static_cast<std::size_t>(out.L) <= catalog.size());
  add("N + 1 <= color width cap", out.N + 1, kDefaultWidthCap, out.N + 1 <= kDefaultWidthCap);

  out.feasible = out.correlation_condition;
  const ClauseCheck* worst = nullptr;
  double worst_margin = inf;
  for (const auto& clause : out.clauses) {
    if (clause.holds) continue;
    out.feasible = false;
    const double margin = std::abs(clause.lhs - clause.rhs) / std::max(1e-12, std::abs(clause.rhs));
    if (!worst || margin < worst_margin) {
      worst = &clause;
      worst_margin = std::isnan(margin) ? inf : margin;
    }
  }
  if (worst)
    out.warning = "infeasible at n = " + std::to_string(n) + ": smallest violated clause is '" + worst->name + "'";
  else if (!out.correlation_condition)
    out.warning = "rho^2 < alpha + epsilon: outside the regime with recovery guarantees";
  return out;
}

}  // namespace cmatch
