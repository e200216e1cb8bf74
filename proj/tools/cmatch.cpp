// Command-line front end: generate, trees, count, score, match, seeded, pipeline, sweep.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmatch/count.hpp"
#include "cmatch/errors.hpp"
#include "cmatch/matchers.hpp"
#include "cmatch/model.hpp"
#include "cmatch/pipeline.hpp"
#include "cmatch/rng.hpp"
#include "cmatch/score.hpp"
#include "cmatch/trees.hpp"

using namespace cmatch;

namespace {

enum ExitCode { kOk = 0, kInvalidConfig = 2, kBudget = 3, kInvariant = 4 };

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    int v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size())
      throw ParameterError("bad level sequence '" + text + "'");
    out.push_back(v);
  }
  return out;
}

std::string levels_text(const RootedTreeShape& shape) { return shape.levels_string(); }

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write '" + path + "'");
  out << text;
}

struct GenerateArgs {
  int n = 100;
  double q = 0.1;
  double rho = 1.0;
  std::string pi_mode = "uniform";
  std::uint64_t seed = 1;
  bool complement = false;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  GraphPair pair;
  if (a.complement) {
    if (a.q <= 0.5) throw ParameterError("--complement expects q > 1/2");
    pair = complement_pair(sample_pair(a.n, 1.0 - a.q, a.rho, parse_pi_mode(a.pi_mode), a.seed));
  } else {
    if (a.q > 0.5)
      throw ParameterError("q = " + std::to_string(a.q) + " exceeds 1/2; pass --complement to sample the complement pair");
    pair = sample_pair(a.n, a.q, a.rho, parse_pi_mode(a.pi_mode), a.seed);
  }
  std::ostringstream text;
  write_pair(text, pair);
  emit(a.out, text.str());
  return kOk;
}

struct TreesArgs {
  int edges = 0;
  std::string max_aut = "inf";
  bool count_only = false;
};

int run_trees(const TreesArgs& a) {
  const BulbCatalog catalog = build_catalog(a.edges, parse_u128(a.max_aut));
  if (a.count_only) {
    std::cout << catalog.size() << '\n';
    if (catalog.size() != catalog.unfiltered)
      std::cerr << "retained " << catalog.size() << " of " << catalog.unfiltered << " shapes\n";
  } else {
    for (const auto& shape : catalog.bulbs) std::cout << "levels=" << levels_text(shape) << " aut=" << to_string(shape.aut()) << '\n';
  }
  if (!catalog.warning.empty()) std::cerr << "warning: " << catalog.warning << '\n';
  return kOk;
}

struct CountArgs {
  std::string tree;
  int root = 0;
  std::string pair;
  std::string graph = "a";
  std::optional<double> q;
  std::uint64_t colorings = 1000;
  std::uint64_t seed = 1;
};

int run_count(const CountArgs& a) {
  const RootedTreeShape shape = RootedTreeShape::from_levels(parse_levels(a.tree));
  const GraphPair pair = read_pair_file(a.pair);
  if (a.root < 0 || a.root >= pair.n) throw ParameterError("--root out of range");
  const Graph& graph = a.graph == "b" ? pair.b : pair.a;
  const WeightedHost host = WeightedHost::centered(graph, a.q.value_or(pair.q));
  std::printf("shape levels=%s edges=%d aut=%s\n", levels_text(shape).c_str(), shape.edges(),
              to_string(shape.aut()).c_str());
  try {
    std::printf("exact %.17g\n", signed_counts_by_partition(host, shape)[static_cast<std::size_t>(a.root)]);
  } catch (const CapError& e) {
    std::printf("exact unavailable (%s)\n", e.what());
  }
  const double r = colorful_probability(shape.edges());
  double sum = 0.0;
  for (std::uint64_t k = 0; k < a.colorings; ++k)
    sum += colorful_count(host, a.root, shape, Coloring::random(pair.n, shape.edges(), derive_seed(a.seed, k)));
  std::printf("estimate %.17g (colorings=%llu r=%.17g)\n", sum / static_cast<double>(a.colorings) / r,
              static_cast<unsigned long long>(a.colorings), r);
  return kOk;
}

struct ScoreArgs {
  std::string pair;
  int K = 2;
  int L = 2;
  int M = 1;
  std::string R = "inf";
  bool exact = false;
  std::optional<std::uint64_t> t;
  std::uint64_t t_cap = 10000;
  std::uint64_t seed = 1;
  double flop_budget = 1e13;
  bool no_cache = false;
  unsigned threads = 0;
  std::optional<double> c;
  bool auto_tau = false;
  std::string out;
};

int run_score(const ScoreArgs& a) {
  const GraphPair pair = read_pair_file(a.pair);
  const ChandelierFamily family = build_family(a.K, a.L, a.M, parse_u128(a.R));
  ScoreMatrix scores;
  if (a.exact) {
    scores = phi_exact(pair, family);
  } else {
    ApproxOptions options;
    options.t_override = a.t;
    options.t_cap = a.t_cap;
    options.seed = a.seed;
    options.flop_budget = a.flop_budget;
    options.use_cache = !a.no_cache;
    options.threads = a.threads;
    scores = phi_approx(pair, family, options);
  }
  const double tau = a.auto_tau ? threshold_data_driven(scores) : threshold_fixed(scores.mu, a.c.value_or(0.5));
  if (a.out.empty()) throw ParameterError("score needs --out");
  write_scores(a.out, scores, tau);
  std::printf("n=%d N=%d |T|=%llu mu=%.17g tau=%.17g r=%.17g t=%llu\n", scores.n, family.N(),
              static_cast<unsigned long long>(family.size()), scores.mu, tau, scores.r,
              static_cast<unsigned long long>(scores.t));
  return kOk;
}

struct MatchArgs {
  std::string scores;
  std::optional<double> tau;
  bool auto_tau = false;
  double c = 0.5;
  std::string out;
};

int run_match(const MatchArgs& a) {
  const ScoreMatrix scores = read_scores(a.scores);
  const double tau = a.tau ? *a.tau : a.auto_tau ? threshold_data_driven(scores) : threshold_fixed(scores.mu, a.c);
  const PartialMatching matching = match_by_threshold(scores, tau);
  std::ostringstream text;
  write_matching(text, matching);
  emit(a.out, text.str());
  std::fprintf(stderr, "tau=%.17g matched=%zu of %d\n", tau, matching.size(), scores.n);
  return kOk;
}

struct SeededArgs {
  std::string pair;
  std::string seeds;
  std::optional<double> q;
  std::optional<double> gamma;
  std::string out;
};

int run_seeded(const SeededArgs& a) {
  const GraphPair pair = read_pair_file(a.pair);
  const PartialMatching seeds = read_matching_file(a.seeds, pair.n);
  const double q = a.q.value_or(pair.empirical_density());
  const double gamma = a.gamma.value_or(seeded_gamma(pair.n, q));
  SeededStats stats;
  const PartialMatching result = seeded_match(pair.a, pair.b, seeds, q, gamma, &stats);
  std::ostringstream text;
  write_matching(text, result);
  emit(a.out, text.str());
  const MatchMetrics m = evaluate(result, pair.pi);
  std::fprintf(stderr, "q=%.17g gamma=%.17g threshold=%.17g added=%zu accuracy=%.17g exact=%d\n", q, gamma,
               stats.threshold, stats.added, m.accuracy, m.exact ? 1 : 0);
  return kOk;
}

// Flag values override config-file keys of the same name.
struct Overrides {
  std::map<std::string, std::string> values;
  std::vector<std::string> sets;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }
  KeyValues merge(const std::string& config_path) const {
    KeyValues kv = config_path.empty() ? KeyValues{} : read_key_values_file(config_path);
    for (const auto& [k, v] : values) kv[k] = v;
    for (const auto& entry : sets) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos) throw ParameterError("--set expects key=value, got '" + entry + "'");
      kv[entry.substr(0, eq)] = entry.substr(eq + 1);
    }
    return kv;
  }
};

void add_common_overrides(CLI::App* app, Overrides& o) {
  o.add(app, "--n", "n", "vertex count");
  o.add(app, "--q", "q", "edge probability");
  o.add(app, "--rho", "rho", "correlation");
  o.add(app, "--seed", "seed", "base seed");
  o.add(app, "--pi-mode", "pi_mode", "identity or uniform");
  o.add(app, "--K", "K", "bulb edges");
  o.add(app, "--L", "L", "bulbs per chandelier");
  o.add(app, "--M", "M", "wire length");
  o.add(app, "--R", "R", "automorphism cap (integer or inf)");
  o.add(app, "--t", "t", "colorings per side (or auto)");
  o.add(app, "--c", "c", "threshold fraction of mu");
  o.add(app, "--exact", "exact", "exact scores (true/false)");
  o.add(app, "--auto-tau", "auto_tau", "data-driven threshold (true/false)");
  o.add(app, "--threads", "threads", "worker threads");
  app->add_option("--set", o.sets, "extra key=value overrides");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlated random graph matching via chandelier counts"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "sample a correlated Erdos-Renyi pair");
  generate->add_option("--n", gen.n, "vertex count");
  generate->add_option("--q", gen.q, "edge probability");
  generate->add_option("--rho", gen.rho, "correlation");
  generate->add_option("--pi-mode", gen.pi_mode, "identity or uniform");
  generate->add_option("--seed", gen.seed, "seed");
  generate->add_flag("--complement", gen.complement, "q > 1/2: sample at 1-q and complement both graphs");
  generate->add_option("--out", gen.out, "output file (default stdout)");

  TreesArgs tr;
  auto* trees = app.add_subcommand("trees", "list rooted trees with K edges");
  trees->add_option("--edges", tr.edges, "edge count")->required();
  trees->add_option("--max-aut", tr.max_aut, "automorphism cap (integer or inf)");
  trees->add_flag("--count-only", tr.count_only, "print only the count");

  CountArgs ct;
  auto* count = app.add_subcommand("count", "exact and color-coded signed count at one root");
  count->add_option("--tree", ct.tree, "level sequence, e.g. 0,1,2,1")->required();
  count->add_option("--root", ct.root, "host root vertex")->required();
  count->add_option("--pair", ct.pair, "graph pair file")->required();
  count->add_option("--graph", ct.graph, "a or b")->check(CLI::IsMember({"a", "b"}));
  count->add_option("--q", ct.q, "centering (default: the pair's q)");
  count->add_option("--colorings", ct.colorings, "colorings for the estimate");
  count->add_option("--seed", ct.seed, "coloring seed");

  ScoreArgs sc;
  auto* score = app.add_subcommand("score", "chandelier similarity scores");
  score->add_option("--pair", sc.pair, "graph pair file")->required();
  score->add_option("--K", sc.K, "bulb edges");
  score->add_option("--L", sc.L, "bulbs per chandelier");
  score->add_option("--M", sc.M, "wire length");
  score->add_option("--R", sc.R, "automorphism cap (integer or inf)");
  score->add_flag("--exact", sc.exact, "exact counts instead of color coding");
  score->add_option("--t", sc.t, "colorings per side");
  score->add_option("--t-cap", sc.t_cap, "cap on the default colorings per side");
  score->add_option("--seed", sc.seed, "coloring seed");
  score->add_option("--flop-budget", sc.flop_budget, "refuse runs above this estimate");
  score->add_flag("--no-cache", sc.no_cache, "disable the bulb table cache");
  score->add_option("--threads", sc.threads, "worker threads (0: all cores)");
  auto* c_opt = score->add_option("--c", sc.c, "tau = c mu");
  score->add_flag("--auto-tau", sc.auto_tau, "data-driven threshold")->excludes(c_opt);
  score->add_option("--out", sc.out, "score CSV (metadata goes to <out>.meta.json)")->required();

  MatchArgs mt;
  auto* match = app.add_subcommand("match", "threshold matching from a score file");
  match->add_option("--scores", mt.scores, "score CSV")->required();
  auto* tau_opt = match->add_option("--tau", mt.tau, "explicit threshold");
  match->add_flag("--auto-tau", mt.auto_tau, "data-driven threshold")->excludes(tau_opt);
  match->add_option("--c", mt.c, "tau = c mu when no threshold is given");
  match->add_option("--out", mt.out, "matching file (default stdout)");

  SeededArgs sd;
  auto* seeded = app.add_subcommand("seeded", "percolation matching from seeds");
  seeded->add_option("--pair", sd.pair, "graph pair file")->required();
  seeded->add_option("--seeds", sd.seeds, "seed matching file")->required();
  seeded->add_option("--q", sd.q, "edge density (default: empirical)");
  seeded->add_option("--gamma", sd.gamma, "threshold multiplier (default: solved)");
  seeded->add_option("--out", sd.out, "matching file (default stdout)");

  std::string pipeline_config, pipeline_out;
  bool pipeline_timings = false;
  Overrides pipeline_overrides;
  auto* pipeline = app.add_subcommand("pipeline", "generate, score, match and complete one instance");
  pipeline->add_option("--config", pipeline_config, "key=value config file");
  pipeline->add_option("--out", pipeline_out, "JSON report (default stdout)");
  pipeline->add_flag("--timings", pipeline_timings, "include wall times in the report");
  add_common_overrides(pipeline, pipeline_overrides);

  std::string sweep_config, sweep_out;
  Overrides sweep_overrides;
  auto* sweep = app.add_subcommand("sweep", "grid of pipeline runs as CSV");
  sweep->add_option("--config", sweep_config, "key=value config file");
  sweep->add_option("--out", sweep_out, "CSV output (default stdout)");
  add_common_overrides(sweep, sweep_overrides);
  sweep_overrides.add(sweep, "--ns", "ns", "comma list of n");
  sweep_overrides.add(sweep, "--qs", "qs", "comma list of q");
  sweep_overrides.add(sweep, "--rhos", "rhos", "comma list of rho");
  sweep_overrides.add(sweep, "--trials", "trials", "trials per cell");
  sweep_overrides.add(sweep, "--workers", "workers", "parallel cells");
  sweep->add_flag_callback("--deterministic", [&] { sweep_overrides.values["deterministic"] = "true"; },
                           "write 0 for wall times");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidConfig;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*trees) return run_trees(tr);
    if (*count) return run_count(ct);
    if (*score) return run_score(sc);
    if (*match) return run_match(mt);
    if (*seeded) return run_seeded(sd);
    if (*pipeline) {
      PipelineConfig config;
      config.apply(pipeline_overrides.merge(pipeline_config));
      const PipelineReport report = run_pipeline(config);
      emit(pipeline_out, report_json(report, pipeline_timings));
      return kOk;
    }
    if (*sweep) {
      SweepConfig config;
      config.apply(sweep_overrides.merge(sweep_config));
      const auto rows = run_sweep(config);
      std::ostringstream text;
      write_sweep_csv(text, config, rows);
      emit(sweep_out, text.str());
      return kOk;
    }
  } catch (const ParameterError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const FormatError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const CapError& e) {
    std::cerr << "size cap exceeded: " << e.what() << '\n';
    return kBudget;
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return kBudget;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kInvariant;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInvariant;
  }
  return kOk;
}
