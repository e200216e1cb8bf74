#include "cmatch/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cmatch/errors.hpp"
#include "cmatch/rng.hpp"

namespace cmatch {

Graph::Graph(int n, std::span<const std::pair<int, int>> edges)
    : n_(n), words_((static_cast<std::size_t>(n) + 63) / 64) {
  if (n < 0) throw ParameterError("graph size must be nonnegative");
  bits_.assign(words_ * static_cast<std::size_t>(n), 0);
  adjacency_.resize(static_cast<std::size_t>(n));
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) throw FormatError("edge endpoint out of range");
    if (u == v) throw FormatError("self-loop at vertex " + std::to_string(u));
    if (has_edge(u, v)) continue;
    bits_[static_cast<std::size_t>(u) * words_ + (static_cast<unsigned>(v) >> 6)] |= 1ULL << (v & 63);
    bits_[static_cast<std::size_t>(v) * words_ + (static_cast<unsigned>(u) >> 6)] |= 1ULL << (u & 63);
    adjacency_[static_cast<std::size_t>(u)].push_back(v);
    adjacency_[static_cast<std::size_t>(v)].push_back(u);
    ++edge_count_;
  }
  for (auto& row : adjacency_) std::sort(row.begin(), row.end());
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(edge_count_);
  for (int u = 0; u < n_; ++u)
    for (int v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

Graph Graph::complement() const {
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < n_; ++u)
    for (int v = u + 1; v < n_; ++v)
      if (!has_edge(u, v)) out.emplace_back(u, v);
  return Graph(n_, out);
}

std::string_view to_string(PiMode mode) noexcept {
  return mode == PiMode::identity ? "identity" : "uniform";
}

PiMode parse_pi_mode(std::string_view text) {
  if (text == "identity") return PiMode::identity;
  if (text == "uniform") return PiMode::uniform;
  throw ParameterError("pi_mode must be 'identity' or 'uniform', got '" + std::string(text) + "'");
}

double rho_min(double q) { return -q / (1.0 - q); }

JointCells joint_cells(double q, double rho) {
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("edge probability q must lie in (0, 1)");
  if (!(rho <= 1.0)) throw ParameterError("correlation rho must be <= 1");
  if (q <= 0.5 && rho < rho_min(q))
    throw ParameterError("correlation rho must be >= -q/(1-q) = " + std::to_string(rho_min(q)));
  const double var = q * (1.0 - q);
  JointCells cells{};
  cells.p11 = q * q + rho * var;
  cells.p10 = var * (1.0 - rho);
  cells.p01 = cells.p10;
  cells.p00 = (1.0 - q) * (1.0 - q) + rho * var;
  if (cells.p11 < 0.0 || cells.p00 < 0.0)
    throw ParameterError("correlation rho makes a joint cell probability negative");
  return cells;
}

double GraphPair::empirical_density() const {
  if (n < 2) return 0.0;
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return static_cast<double>(a.edge_count() + b.edge_count()) / (2.0 * pairs);
}

GraphPair sample_pair(int n, double q, double rho, PiMode pi_mode, std::uint64_t seed) {
  if (n < 2) throw ParameterError("n must be >= 2");
  if (!(q > 0.0)) throw ParameterError("q must be > 0");
  if (q > 0.5)
    throw ParameterError("q must be <= 1/2; for denser graphs sample at 1-q and complement "
                         "(CLI: --complement)");
  if (!(rho >= rho_min(q)) || !(rho <= 1.0))
    throw ParameterError("rho must lie in [rho_min(q), 1] = [" + std::to_string(rho_min(q)) + ", 1]");
  const JointCells cells = joint_cells(q, rho);

  GraphPair pair;
  pair.n = n;
  pair.q = q;
  pair.rho = rho;
  pair.seed = seed;
  pair.pi_mode = pi_mode;
  pair.pi.resize(static_cast<std::size_t>(n));
  std::iota(pair.pi.begin(), pair.pi.end(), 0);
  if (pi_mode == PiMode::uniform) {
    Rng perm_rng(derive_seed(seed, 0));
    perm_rng.shuffle(pair.pi.begin(), pair.pi.end());
  }

  Rng rng(derive_seed(seed, 1));
  const double t1 = cells.p11;
  const double t2 = cells.p11 + cells.p10;
  const double t3 = t2 + cells.p01;
  std::vector<std::pair<int, int>> edges_a;
  std::vector<std::pair<int, int>> edges_b;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double u = rng.uniform01();
      const bool in_a = u < t2;
      const bool in_b = u < t1 || (u >= t2 && u < t3);
      if (in_a) edges_a.emplace_back(i, j);
      if (in_b) edges_b.emplace_back(pair.pi[static_cast<std::size_t>(i)], pair.pi[static_cast<std::size_t>(j)]);
    }
  }
  pair.a = Graph(n, edges_a);
  pair.b = Graph(n, edges_b);
  return pair;
}

GraphPair complement_pair(const GraphPair& pair) {
  GraphPair out = pair;
  out.q = 1.0 - pair.q;
  out.a = pair.a.complement();
  out.b = pair.b.complement();
  return out;
}

double cross_moment(int l, int m, double q, double rho) {
  if (l < 0 || l > 2 || m < 0 || m > 2 || l + m < 2 || l + m > 4)
    throw ParameterError("cross_moment needs 0 <= l, m <= 2 and 2 <= l + m <= 4");
  const double var = q * (1.0 - q);
  switch (l + m) {
    case 2:
      return (l == 1 && m == 1) ? rho : 1.0;
    case 3:
      return rho * (1.0 - 2.0 * q) / std::sqrt(var);
    default:
      return (var + rho * (1.0 - 2.0 * q) * (1.0 - 2.0 * q)) / var;
  }
}

void write_pair(std::ostream& out, const GraphPair& pair) {
  std::ostringstream header;
  header.precision(17);
  header << pair.n << ' ' << pair.q << ' ' << pair.rho << ' ' << pair.seed << ' ' << to_string(pair.pi_mode);
  out << header.str() << '\n';
  for (auto [u, v] : pair.a.edges()) out << u << ' ' << v << '\n';
  out << "%\n";
  for (auto [u, v] : pair.b.edges()) out << u << ' ' << v << '\n';
  out << "%\n";
  for (int i = 0; i < pair.n; ++i) out << i << ' ' << pair.pi[static_cast<std::size_t>(i)] << '\n';
}

GraphPair read_pair(std::istream& in) {
  GraphPair pair;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("graph file: missing header");
  {
    std::istringstream header(line);
    std::string mode;
    if (!(header >> pair.n >> pair.q >> pair.rho >> pair.seed >> mode))
      throw FormatError("graph file: header must be `n q rho seed pi_mode`");
    pair.pi_mode = parse_pi_mode(mode);
  }
  if (pair.n < 1) throw FormatError("graph file: n must be positive");

  std::vector<std::pair<int, int>> sections[2];
  std::vector<std::pair<int, int>> perm;
  int section = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line == "%") {
      if (++section > 2) throw FormatError("graph file: too many '%' separators");
      continue;
    }
    std::istringstream fields(line);
    int u = 0;
    int v = 0;
    if (!(fields >> u >> v)) throw FormatError("graph file: bad line " + std::to_string(line_no));
    if (section < 2)
      sections[section].emplace_back(u, v);
    else
      perm.emplace_back(u, v);
  }
  if (section != 2) throw FormatError("graph file: expected two '%' separators");
  pair.a = Graph(pair.n, sections[0]);
  pair.b = Graph(pair.n, sections[1]);

  pair.pi.assign(static_cast<std::size_t>(pair.n), -1);
  std::vector<char> hit(static_cast<std::size_t>(pair.n), 0);
  for (auto [i, p] : perm) {
    if (i < 0 || i >= pair.n || p < 0 || p >= pair.n) throw FormatError("graph file: permutation entry out of range");
    if (pair.pi[static_cast<std::size_t>(i)] != -1 || hit[static_cast<std::size_t>(p)])
      throw FormatError("graph file: permutation is not a bijection");
    pair.pi[static_cast<std::size_t>(i)] = p;
    hit[static_cast<std::size_t>(p)] = 1;
  }
  if (perm.size() != static_cast<std::size_t>(pair.n)) throw FormatError("graph file: permutation is incomplete");
  return pair;
}

GraphPair read_pair_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open graph file '" + path + "'");
  return read_pair(in);
}

void write_pair_file(const std::string& path, const GraphPair& pair) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write graph file '" + path + "'");
  write_pair(out, pair);
}

}  // namespace cmatch
