#include "cmatch/oracle.hpp"

#include <algorithm>

#include "cmatch/errors.hpp"

namespace cmatch::oracle {

namespace {

struct AdjacencyMatrix {
  int n;
  std::vector<char> bits;
  bool operator()(int a, int b) const { return bits[static_cast<std::size_t>(a * n + b)] != 0; }
};

AdjacencyMatrix to_matrix(const RootedTreeShape& shape) {
  const auto parents = shape.parents();
  AdjacencyMatrix m{shape.vertices(), std::vector<char>(static_cast<std::size_t>(shape.vertices() * shape.vertices()), 0)};
  for (int v = 1; v < m.n; ++v) {
    const int p = parents[static_cast<std::size_t>(v)];
    m.bits[static_cast<std::size_t>(v * m.n + p)] = 1;
    m.bits[static_cast<std::size_t>(p * m.n + v)] = 1;
  }
  return m;
}

std::uint64_t count_bijections(const AdjacencyMatrix& adj, std::vector<int>& image, std::vector<char>& used, int v) {
  if (v == adj.n) return 1;
  std::uint64_t total = 0;
  for (int u = 1; u < adj.n; ++u) {
    if (used[static_cast<std::size_t>(u)]) continue;
    bool ok = true;
    for (int w = 0; w < v && ok; ++w) ok = adj(v, w) == adj(u, image[static_cast<std::size_t>(w)]);
    if (!ok) continue;
    used[static_cast<std::size_t>(u)] = 1;
    image[static_cast<std::size_t>(v)] = u;
    total += count_bijections(adj, image, used, v + 1);
    used[static_cast<std::size_t>(u)] = 0;
  }
  return total;
}

double colorful_embeddings(const WeightedHost& host, const std::vector<int>& parents, const Coloring& coloring,
                           std::vector<int>& image, std::vector<char>& color_used, std::size_t v) {
  if (v == parents.size()) return 1.0;
  const int anchor = image[static_cast<std::size_t>(parents[v])];
  double total = 0.0;
  for (int u = 0; u < host.size(); ++u) {
    const auto color = coloring.colors[static_cast<std::size_t>(u)];
    if (color_used[color]) continue;  // distinct colors imply distinct vertices
    const double w = host.weight(anchor, u);
    if (w == 0.0) continue;
    color_used[color] = 1;
    image[v] = u;
    total += w * colorful_embeddings(host, parents, coloring, image, color_used, v + 1);
    color_used[color] = 0;
  }
  return total;
}

}  // namespace

std::uint64_t automorphisms_bruteforce(const RootedTreeShape& shape) {
  if (shape.edges() > 9) throw CapError("automorphisms_bruteforce is limited to 9 edges");
  const auto adj = to_matrix(shape);
  std::vector<int> image(static_cast<std::size_t>(adj.n), -1);
  std::vector<char> used(static_cast<std::size_t>(adj.n), 0);
  image[0] = 0;
  used[0] = 1;
  return count_bijections(adj, image, used, 1);
}

double colorful_count_bruteforce(const WeightedHost& host, int root, const RootedTreeShape& shape,
                                 const Coloring& coloring) {
  if (shape.edges() != coloring.N) throw ParameterError("shape and coloring disagree on N");
  const auto parents = shape.parents();
  std::vector<int> image(parents.size(), -1);
  std::vector<char> color_used(static_cast<std::size_t>(coloring.width()), 0);
  image[0] = root;
  color_used[coloring.colors[static_cast<std::size_t>(root)]] = 1;
  const double ordered = colorful_embeddings(host, parents, coloring, image, color_used, 1);
  return ordered / static_cast<double>(automorphisms_bruteforce(shape));
}

double exhaustive_coloring_expectation(const WeightedHost& host, const RootedTreeShape& shape, int root) {
  const int width = shape.edges() + 1;
  const double total = std::pow(static_cast<double>(width), host.size());
  if (total > 1e7) throw CapError("exhaustive coloring expectation needs (N+1)^n <= 1e7");
  Coloring coloring;
  coloring.N = shape.edges();
  coloring.colors.assign(static_cast<std::size_t>(host.size()), 0);
  double sum = 0.0;
  for (;;) {
    sum += colorful_count(host, root, shape, coloring);
    std::size_t k = 0;
    for (; k < coloring.colors.size(); ++k) {
      if (++coloring.colors[k] < width) break;
      coloring.colors[k] = 0;
    }
    if (k == coloring.colors.size()) break;
  }
  return sum / total;
}

std::vector<double> phi_bruteforce(const GraphPair& pair, const ChandelierFamily& family) {
  const auto n = static_cast<std::size_t>(pair.n);
  const WeightedHost host_a = WeightedHost::centered(pair.a, pair.q);
  const WeightedHost host_b = WeightedHost::centered(pair.b, pair.q);
  std::vector<double> phi(n * n, 0.0);
  for (const auto& chandelier : family.materialize()) {
    std::vector<double> wa(n);
    std::vector<double> wb(n);
    for (std::size_t i = 0; i < n; ++i) {
      wa[i] = exact_signed_count(host_a, static_cast<int>(i), chandelier.realized);
      wb[i] = exact_signed_count(host_b, static_cast<int>(i), chandelier.realized);
    }
    const double aut = static_cast<double>(automorphisms_bruteforce(chandelier.realized));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) phi[i * n + j] += aut * wa[i] * wb[j];
  }
  return phi;
}

}  // namespace cmatch::oracle
