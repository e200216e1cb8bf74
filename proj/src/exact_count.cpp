#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cmatch/count.hpp"
#include "cmatch/errors.hpp"

namespace cmatch {

namespace {

class EmbeddingSearch {
 public:
  EmbeddingSearch(const WeightedHost& host, const RootedTreeShape& shape)
      : host_(host), parents_(shape.parents()), image_(parents_.size(), -1),
        used_(static_cast<std::size_t>(host.size()), 0) {}

  double run(int root) {
    image_[0] = root;
    used_[static_cast<std::size_t>(root)] = 1;
    const double total = place(1, 1.0);
    used_[static_cast<std::size_t>(root)] = 0;
    return total;
  }

 private:
  double place(std::size_t v, double product) {
    if (v == parents_.size()) return product;
    const int anchor = image_[static_cast<std::size_t>(parents_[v])];
    double total = 0.0;
    for (int u = 0; u < host_.size(); ++u) {
      if (used_[static_cast<std::size_t>(u)]) continue;
      const double w = host_.weight(anchor, u);
      if (w == 0.0) continue;
      used_[static_cast<std::size_t>(u)] = 1;
      image_[v] = u;
      total += place(v + 1, product * w);
      used_[static_cast<std::size_t>(u)] = 0;
    }
    return total;
  }

  const WeightedHost& host_;
  std::vector<int> parents_;
  std::vector<int> image_;
  std::vector<char> used_;
};

// Dense factor over a few block variables, each ranging over [n].
// Index = sum_k assignment[vars[k]] * n^(arity-1-k).
struct Factor {
  std::vector<int> vars;
  std::vector<double> values;
};

constexpr double kMaxFactorEntries = 6.0e7;

std::size_t power(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) out *= base;
  return out;
}

Factor eliminate(std::vector<const Factor*> involved, int var, std::size_t n) {
  std::vector<int> keep;
  for (const Factor* f : involved)
    for (int v : f->vars)
      if (v != var) keep.push_back(v);
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (std::pow(static_cast<double>(n), static_cast<double>(keep.size() + 1)) > kMaxFactorEntries * static_cast<double>(n))
    throw CapError("partition counting: intermediate factor too large for this host size");

  // strides[f][k]: stride of keep[k] inside factor f; var_stride[f]: stride of var
  const std::size_t nf = involved.size();
  std::vector<std::vector<std::size_t>> strides(nf, std::vector<std::size_t>(keep.size(), 0));
  std::vector<std::size_t> var_stride(nf, 0);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& vars = involved[f]->vars;
    for (std::size_t k = 0; k < vars.size(); ++k) {
      const std::size_t stride = power(n, vars.size() - 1 - k);
      if (vars[k] == var) {
        var_stride[f] = stride;
      } else {
        const auto pos = static_cast<std::size_t>(std::lower_bound(keep.begin(), keep.end(), vars[k]) - keep.begin());
        strides[f][pos] = stride;
      }
    }
  }

  Factor out;
  out.vars = keep;
  const std::size_t total = power(n, keep.size());
  out.values.assign(total, 0.0);
  std::vector<std::size_t> digits(keep.size(), 0);
  std::vector<std::size_t> base(nf, 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    double sum = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      double prod = 1.0;
      for (std::size_t f = 0; f < nf; ++f) prod *= involved[f]->values[base[f] + x * var_stride[f]];
      sum += prod;
    }
    out.values[idx] = sum;
    // odometer over keep, last variable fastest
    for (std::size_t k = keep.size(); k-- > 0;) {
      ++digits[k];
      for (std::size_t f = 0; f < nf; ++f) base[f] += strides[f][k];
      if (digits[k] < n) break;
      for (std::size_t f = 0; f < nf; ++f) base[f] -= strides[f][k] * n;
      digits[k] = 0;
    }
  }
  return out;
}

// Sum over all maps of the quotient's non-root blocks of the product of edge
// factors, returned as a function of the root block's image.
std::vector<double> rooted_homomorphisms(std::vector<Factor> factors, int blocks, std::size_t n) {
  std::vector<double> scalar_product{1.0};
  std::vector<bool> alive(static_cast<std::size_t>(blocks), true);
  for (int remaining = blocks - 1; remaining > 0; --remaining) {
    // variable with the smallest union of neighbors, never the root (block 0)
    int best = -1;
    std::size_t best_size = std::numeric_limits<std::size_t>::max();
    for (int v = 1; v < blocks; ++v) {
      if (!alive[static_cast<std::size_t>(v)]) continue;
      std::vector<int> nb;
      for (const auto& f : factors)
        if (std::find(f.vars.begin(), f.vars.end(), v) != f.vars.end())
          nb.insert(nb.end(), f.vars.begin(), f.vars.end());
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
      if (nb.size() < best_size) {
        best_size = nb.size();
        best = v;
      }
    }
    std::vector<const Factor*> involved;
    std::vector<Factor> rest;
    for (const auto& f : factors)
      if (std::find(f.vars.begin(), f.vars.end(), best) != f.vars.end()) involved.push_back(&f);
    Factor produced;
    if (involved.empty()) {
      produced.values.assign(1, static_cast<double>(n));
    } else {
      produced = eliminate(involved, best, n);
    }
    for (auto& f : factors)
      if (std::find(f.vars.begin(), f.vars.end(), best) == f.vars.end()) rest.push_back(std::move(f));
    rest.push_back(std::move(produced));
    factors = std::move(rest);
    alive[static_cast<std::size_t>(best)] = false;
  }

  std::vector<double> out(n, 1.0);
  for (const auto& f : factors) {
    if (f.vars.empty()) {
      for (auto& v : out) v *= f.values[0];
    } else {
      for (std::size_t x = 0; x < n; ++x) out[x] *= f.values[x];
    }
  }
  return out;
}

}  // namespace

double exact_signed_count(const WeightedHost& host, int root, const RootedTreeShape& shape) {
  if (shape.edges() > kBacktrackMaxEdges || host.size() > kBacktrackMaxVertices)
    throw CapError("exact_signed_count is limited to shapes with <= 6 edges and hosts with <= 40 vertices");
  if (root < 0 || root >= host.size()) throw ParameterError("root out of range");
  if (shape.vertices() > host.size()) return 0.0;
  EmbeddingSearch search(host, shape);
  return search.run(root) / static_cast<double>(shape.aut());
}

std::vector<double> signed_counts_by_partition(const WeightedHost& host, const RootedTreeShape& shape) {
  const int V = shape.vertices();
  if (V > kPartitionMaxVertices) throw CapError("signed_counts_by_partition is limited to trees with <= 9 vertices");
  const auto n = static_cast<std::size_t>(host.size());
  if (V == 1) return std::vector<double>(n, 1.0);
  if (static_cast<std::size_t>(V) > n) return std::vector<double>(n, 0.0);

  const auto parents = shape.parents();
  const std::vector<double> dense = host.dense();
  std::map<int, Factor> powers;  // elementwise powers of the weight matrix over (0, 1)
  auto power_factor = [&](int k) -> const Factor& {
    auto it = powers.find(k);
    if (it != powers.end()) return it->second;
    Factor f;
    f.vars = {0, 1};
    f.values.resize(dense.size());
    for (std::size_t i = 0; i < dense.size(); ++i) f.values[i] = std::pow(dense[i], k);
    return powers.emplace(k, std::move(f)).first->second;
  };

  std::vector<double> total(n, 0.0);
  std::vector<int> block(static_cast<std::size_t>(V), 0);
  std::vector<int> block_size;

  // Restricted growth strings; a child never shares its parent's block since
  // the diagonal weights vanish.
  auto visit = [&](auto&& self, int v, int blocks) -> void {
    if (v == V) {
      double coefficient = 1.0;
      for (int b = 0; b < blocks; ++b) {
        const int s = block_size[static_cast<std::size_t>(b)];
        for (int k = 1; k < s; ++k) coefficient *= -static_cast<double>(k);
      }
      std::map<std::pair<int, int>, int> multiplicity;
      for (int u = 1; u < V; ++u) {
        int x = block[static_cast<std::size_t>(u)];
        int y = block[static_cast<std::size_t>(parents[static_cast<std::size_t>(u)])];
        if (x > y) std::swap(x, y);
        ++multiplicity[{x, y}];
      }
      std::vector<Factor> factors;
      for (const auto& [edge, k] : multiplicity) {
        Factor f = power_factor(k);
        f.vars = {edge.first, edge.second};
        factors.push_back(std::move(f));
      }
      const auto hom = rooted_homomorphisms(std::move(factors), blocks, n);
      for (std::size_t x = 0; x < n; ++x) total[x] += coefficient * hom[x];
      return;
    }
    const int parent_block = block[static_cast<std::size_t>(parents[static_cast<std::size_t>(v)])];
    for (int b = 0; b <= blocks; ++b) {
      if (b == parent_block) continue;
      block[static_cast<std::size_t>(v)] = b;
      if (b == blocks) block_size.push_back(0);
      ++block_size[static_cast<std::size_t>(b)];
      self(self, v + 1, b == blocks ? blocks + 1 : blocks);
      --block_size[static_cast<std::size_t>(b)];
      if (b == blocks) block_size.pop_back();
    }
  };
  block_size.push_back(1);
  visit(visit, 1, 1);

  const double aut = static_cast<double>(shape.aut());
  for (auto& v : total) v /= aut;
  return total;
}

}  // namespace cmatch
