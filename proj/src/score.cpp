#include "cmatch/score.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cmatch/count.hpp"
#include "cmatch/errors.hpp"
#include "cmatch/rng.hpp"

namespace cmatch {

namespace {

constexpr int kExactMaxN = 8;
constexpr int kExactMaxVertices = 400;
constexpr std::uint64_t kExactMaxFamily = 50;

struct FamilyMember {
  std::vector<int> bulb_ids;
  u128 aut;
};

std::vector<FamilyMember> members(const ChandelierFamily& family) {
  std::vector<FamilyMember> out;
  out.reserve(static_cast<std::size_t>(family.size()));
  for (auto cur = family.cursor(); !cur.done(); cur.advance()) {
    u128 aut = 1;
    for (int id : cur.subset()) aut *= family.catalog().bulbs[static_cast<std::size_t>(id)].aut();
    out.push_back({cur.subset(), aut});
  }
  return out;
}

// Per-side coloring sums for a contiguous block of colorings: [member][vertex].
struct PartialSums {
  std::vector<double> a;
  std::vector<double> b;
  std::size_t hits = 0;
  std::size_t misses = 0;
};

void accumulate_side(const WeightedHost& host, const ChandelierFamily& family, const std::vector<FamilyMember>& family_members,
                     std::uint64_t coloring_seed, bool use_cache, std::vector<double>& sums, std::size_t& hits,
                     std::size_t& misses) {
  const auto n = static_cast<std::size_t>(host.size());
  const Coloring coloring = Coloring::random(host.size(), family.N(), coloring_seed);
  const ColorCoder coder(host, coloring);
  BulbTableCache cache(coder, family.catalog(), family.M(), use_cache);
  for (std::size_t h = 0; h < family_members.size(); ++h) {
    const auto x = chandelier_colorful_counts(coder, cache, family_members[h].bulb_ids, family_members[h].aut);
    double* dst = sums.data() + h * n;
    for (std::size_t i = 0; i < n; ++i) dst[i] += x[i];
  }
  hits += cache.hits();
  misses += cache.misses();
}

}  // namespace

FamilyFingerprint FamilyFingerprint::of(const ChandelierFamily& family) {
  return {family.K(), family.L(), family.M(), family.N(), family.R(), family.size()};
}

ScoreMatrix phi_exact(const GraphPair& pair, const ChandelierFamily& family) {
  if (family.N() > kExactMaxN || pair.n > kExactMaxVertices || family.size() > kExactMaxFamily)
    throw CapError("phi_exact is limited to N <= 8, n <= 400 and |T| <= 50");
  const auto n = static_cast<std::size_t>(pair.n);
  const WeightedHost host_a = WeightedHost::centered(pair.a, pair.q);
  const WeightedHost host_b = WeightedHost::centered(pair.b, pair.q);

  ScoreMatrix out;
  out.n = pair.n;
  out.mode = ScoreMode::exact;
  out.fingerprint = FamilyFingerprint::of(family);
  out.mu = chandelier_mean(family.size(), pair.n, family.N(), pair.q, pair.rho);
  out.scores.assign(n * n, 0.0);
  for (auto cur = family.cursor(); !cur.done(); cur.advance()) {
    const Chandelier ch = make_chandelier(family.catalog(), cur.subset(), family.M());
    const auto wa = signed_counts_by_partition(host_a, ch.realized);
    const auto wb = signed_counts_by_partition(host_b, ch.realized);
    const double aut = static_cast<double>(ch.aut);
    for (std::size_t i = 0; i < n; ++i) {
      const double left = aut * wa[i];
      double* dst = out.scores.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) dst[j] += left * wb[j];
    }
  }
  return out;
}

std::uint64_t colorings_per_side(int N, const ApproxOptions& options) {
  if (options.t_override) {
    if (*options.t_override == 0) throw ParameterError("the number of colorings t must be positive");
    return *options.t_override;
  }
  if (options.t_cap == 0) throw ParameterError("t_cap must be positive");
  const double inverse = 1.0 / colorful_probability(N);
  const double t = std::ceil(inverse - 1e-9);
  return t >= static_cast<double>(options.t_cap) ? options.t_cap : static_cast<std::uint64_t>(t);
}

double estimate_approx_flops(const GraphPair& pair, const ChandelierFamily& family, std::uint64_t t) {
  const double n = pair.n;
  const double width = family.N() + 1;
  const double stream = n + static_cast<double>(pair.a.edge_count() + pair.b.edge_count());
  const int branch = family.K() + family.M();
  double per_bulb = 0.0;
  for (int s = 1; s <= branch; ++s) per_bulb += stream * static_cast<double>(binomial(static_cast<std::uint64_t>(width), static_cast<std::uint64_t>(s)));
  const double per_coloring = static_cast<double>(family.catalog().size()) * per_bulb +
                              static_cast<double>(family.size()) * n * std::pow(2.0, width);
  return 2.0 * static_cast<double>(t) * per_coloring;
}

ScoreMatrix phi_approx(const GraphPair& pair, const ChandelierFamily& family, const ApproxOptions& options) {
  if (family.N() + 1 > kMaxColorWidth) throw CapError("phi_approx needs N + 1 <= 24 colors");
  const std::uint64_t t = colorings_per_side(family.N(), options);
  const double flops = estimate_approx_flops(pair, family, t);
  if (flops > options.flop_budget) {
    std::ostringstream msg;
    msg << "phi_approx would need about " << flops << " flops, above the budget of " << options.flop_budget;
    throw BudgetError(msg.str());
  }
  const double r = colorful_probability(family.N());
  const auto n = static_cast<std::size_t>(pair.n);
  const auto family_members = members(family);
  const std::size_t slots = family_members.size() * n;
  const WeightedHost host_a = WeightedHost::centered(pair.a, pair.q);
  const WeightedHost host_b = WeightedHost::centered(pair.b, pair.q);

  const std::size_t chunk = std::max<std::size_t>(1, options.chunk_size);
  const std::size_t chunks = static_cast<std::size_t>((t + chunk - 1) / chunk);
  unsigned threads = options.threads ? options.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, chunks));

  auto run_chunk = [&](std::size_t c) {
    PartialSums part;
    part.a.assign(slots, 0.0);
    part.b.assign(slots, 0.0);
    const std::uint64_t begin = c * chunk;
    const std::uint64_t end = std::min<std::uint64_t>(t, begin + chunk);
    for (std::uint64_t a = begin; a < end; ++a) {
      accumulate_side(host_a, family, family_members, derive_seed(options.seed, 2 * a), options.use_cache, part.a,
                      part.hits, part.misses);
      accumulate_side(host_b, family, family_members, derive_seed(options.seed, 2 * a + 1), options.use_cache, part.b,
                      part.hits, part.misses);
    }
    return part;
  };

  std::vector<double> sum_a(slots, 0.0);
  std::vector<double> sum_b(slots, 0.0);
  std::size_t hits = 0;
  std::size_t misses = 0;
  auto merge = [&](const PartialSums& part) {
    for (std::size_t k = 0; k < slots; ++k) {
      sum_a[k] += part.a[k];
      sum_b[k] += part.b[k];
    }
    hits += part.hits;
    misses += part.misses;
  };

  // Waves of `threads` chunks, merged in chunk order.
  for (std::size_t first = 0; first < chunks; first += threads) {
    const std::size_t count = std::min<std::size_t>(threads, chunks - first);
    std::vector<PartialSums> parts(count);
    if (count == 1) {
      parts[0] = run_chunk(first);
    } else {
      std::vector<std::jthread> workers;
      workers.reserve(count);
      for (std::size_t w = 0; w < count; ++w)
        workers.emplace_back([&, w] { parts[w] = run_chunk(first + w); });
    }
    for (const auto& part : parts) merge(part);
  }

  ScoreMatrix out;
  out.n = pair.n;
  out.mode = ScoreMode::approx;
  out.fingerprint = FamilyFingerprint::of(family);
  out.mu = chandelier_mean(family.size(), pair.n, family.N(), pair.q, pair.rho);
  out.r = r;
  out.t = t;
  out.seed = options.seed;
  out.cache_hits = hits;
  out.cache_misses = misses;
  out.scores.assign(n * n, 0.0);
  const double inv_t = 1.0 / static_cast<double>(t);
  const double scale = 1.0 / (r * r);
  for (std::size_t h = 0; h < family_members.size(); ++h) {
    const double weight = scale * static_cast<double>(family_members[h].aut);
    const double* xa = sum_a.data() + h * n;
    const double* xb = sum_b.data() + h * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double left = weight * (xa[i] * inv_t);
      double* dst = out.scores.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) dst[j] += left * (xb[j] * inv_t);
    }
  }
  return out;
}

double threshold_fixed(double mu, double c) {
  if (!(c > 0.0 && c < 1.0)) throw ParameterError("threshold constant c must lie in (0, 1)");
  return c * mu;
}

double threshold_data_driven(const ScoreMatrix& scores) {
  if (scores.n < 1) throw ParameterError("empty score matrix");
  const auto n = static_cast<std::size_t>(scores.n);
  std::vector<double> best(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = scores.row(static_cast<int>(i));
    best[i] = *std::max_element(row.begin(), row.end());
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return best[x] < best[y]; });
  return 0.5 * best[order[(n - 1) / 2]];
}

void write_scores(const std::string& path, const ScoreMatrix& scores, std::optional<double> tau) {
  {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write score file '" + path + "'");
    char buf[32];
    for (int i = 0; i < scores.n; ++i) {
      const auto row = scores.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", row[j]);
        if (j) out << ',';
        out << buf;
      }
      out << '\n';
    }
  }
  nlohmann::ordered_json meta;
  meta["schema_version"] = 1;
  meta["n"] = scores.n;
  meta["mode"] = scores.mode == ScoreMode::exact ? "exact" : "approx";
  meta["family"] = {{"K", scores.fingerprint.K}, {"L", scores.fingerprint.L}, {"M", scores.fingerprint.M},
                    {"N", scores.fingerprint.N},  {"R", to_string(scores.fingerprint.R)},
                    {"size", scores.fingerprint.size}};
  meta["mu"] = scores.mu;
  if (tau) meta["tau"] = *tau;
  meta["r"] = scores.r;
  meta["t"] = scores.t;
  meta["seed"] = scores.seed;
  meta["coloring_seeds"] = "derive_seed(seed, 2a) for A, derive_seed(seed, 2a+1) for B, a < t";
  meta["rng"] = std::string(kRngAlgorithm);
  std::ofstream out(path + ".meta.json");
  if (!out) throw FormatError("cannot write score metadata for '" + path + "'");
  out << meta.dump(2) << '\n';
}

ScoreMatrix read_scores(const std::string& path) {
  ScoreMatrix out;
  {
    std::ifstream meta_in(path + ".meta.json");
    if (meta_in) {
      try {
        const auto meta = nlohmann::json::parse(meta_in);
        out.mode = meta.at("mode").get<std::string>() == "exact" ? ScoreMode::exact : ScoreMode::approx;
        out.mu = meta.at("mu").get<double>();
        out.r = meta.value("r", 1.0);
        out.t = meta.value("t", std::uint64_t{0});
        out.seed = meta.value("seed", std::uint64_t{0});
        const auto& fam = meta.at("family");
        out.fingerprint = {fam.at("K").get<int>(), fam.at("L").get<int>(), fam.at("M").get<int>(),
                           fam.at("N").get<int>(), parse_u128(fam.at("R").get<std::string>()),
                           fam.at("size").get<std::uint64_t>()};
      } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad score metadata for '" + path + "': " + e.what());
      }
    }
  }
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open score file '" + path + "'");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(fields, cell, ',')) {
      try {
        out.scores.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw FormatError("score file: bad number '" + cell + "'");
      }
      ++cols;
    }
    if (rows == 0) out.n = static_cast<int>(cols);
    if (cols != static_cast<std::size_t>(out.n)) throw FormatError("score file: ragged rows");
    ++rows;
  }
  if (rows != static_cast<std::size_t>(out.n)) throw FormatError("score file: matrix is not square");
  for (double v : out.scores)
    if (!std::isfinite(v)) throw FormatError("score file: non-finite entry");
  return out;
}

}  // namespace cmatch
