#include "cmatch/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cmatch/errors.hpp"
#include "cmatch/rng.hpp"

namespace cmatch {

namespace {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return std::string(text.substr(first, last - first + 1));
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw ParameterError("config key '" + key + "': cannot parse '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ParameterError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_number<T>(key, trim(item)));
  if (out.empty()) throw ParameterError("config key '" + key + "': empty list");
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>)
      out += format_double(values[i]);
    else
      out += std::to_string(values[i]);
  }
  return out;
}

void check_schema(const KeyValues& values) {
  const auto it = values.find("schema_version");
  if (it == values.end()) return;
  if (parse_number<int>(it->first, it->second) != kConfigSchemaVersion)
    throw ParameterError("unsupported config schema_version " + it->second);
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

KeyValues parse_key_values(std::istream& in) {
  KeyValues out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParameterError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ParameterError("config line " + std::to_string(line_no) + ": empty key");
    out[key] = value;
  }
  return out;
}

KeyValues read_key_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file '" + path + "'");
  return parse_key_values(in);
}

void PipelineConfig::apply(const KeyValues& values) {
  check_schema(values);
  for (const auto& [key, value] : values) {
    if (key == "schema_version") continue;
    if (key == "n") n = parse_number<int>(key, value);
    else if (key == "q") q = parse_number<double>(key, value);
    else if (key == "rho") rho = parse_number<double>(key, value);
    else if (key == "pi_mode") pi_mode = parse_pi_mode(value);
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else if (key == "auto_params") auto_params = parse_bool(key, value);
    else if (key == "K") K = parse_number<int>(key, value);
    else if (key == "L") L = parse_number<int>(key, value);
    else if (key == "M") M = parse_number<int>(key, value);
    else if (key == "R") R = parse_u128(value);
    else if (key == "epsilon") epsilon = parse_number<double>(key, value);
    else if (key == "exact") exact = parse_bool(key, value);
    else if (key == "t") t = value == "auto" ? std::nullopt : std::optional(parse_number<std::uint64_t>(key, value));
    else if (key == "t_cap") t_cap = parse_number<std::uint64_t>(key, value);
    else if (key == "c") c = parse_number<double>(key, value);
    else if (key == "auto_tau") auto_tau = parse_bool(key, value);
    else if (key == "seeded_q") seeded_q = value == "auto" ? std::nullopt : std::optional(parse_number<double>(key, value));
    else if (key == "seeded") seeded = parse_bool(key, value);
    else if (key == "flop_budget") flop_budget = parse_number<double>(key, value);
    else if (key == "use_cache") use_cache = parse_bool(key, value);
    else if (key == "threads") threads = parse_number<unsigned>(key, value);
    else throw ParameterError("unknown config key '" + key + "'");
  }
}

KeyValues PipelineConfig::to_key_values() const {
  KeyValues out;
  out["schema_version"] = std::to_string(kConfigSchemaVersion);
  out["n"] = std::to_string(n);
  out["q"] = format_double(q);
  out["rho"] = format_double(rho);
  out["pi_mode"] = std::string(to_string(pi_mode));
  out["seed"] = std::to_string(seed);
  out["auto_params"] = auto_params ? "true" : "false";
  out["K"] = std::to_string(K);
  out["L"] = std::to_string(L);
  out["M"] = std::to_string(M);
  out["R"] = to_string(R);
  out["epsilon"] = format_double(epsilon);
  out["exact"] = exact ? "true" : "false";
  out["t"] = t ? std::to_string(*t) : "auto";
  out["t_cap"] = std::to_string(t_cap);
  out["c"] = format_double(c);
  out["auto_tau"] = auto_tau ? "true" : "false";
  out["seeded_q"] = seeded_q ? format_double(*seeded_q) : "auto";
  out["seeded"] = seeded ? "true" : "false";
  out["flop_budget"] = format_double(flop_budget);
  out["use_cache"] = use_cache ? "true" : "false";
  out["threads"] = std::to_string(threads);
  return out;
}

PipelineReport run_pipeline(const PipelineConfig& config) {
  PipelineReport report;
  report.config = config;
  report.pair_seed = derive_seed(config.seed, 0);
  report.score_seed = derive_seed(config.seed, 1);

  const GraphPair pair = sample_pair(config.n, config.q, config.rho, config.pi_mode, report.pair_seed);

  int K = config.K, L = config.L, M = config.M;
  u128 R = config.R;
  if (config.auto_params) {
    const ParameterChoice choice = select_parameters(config.n, config.q, config.rho, config.epsilon);
    K = choice.K;
    L = choice.L;
    M = choice.M;
    R = choice.R;
    if (!choice.warning.empty()) report.notes.push_back(choice.warning);
  }
  const ChandelierFamily family = build_family(K, L, M, R);
  report.K = K;
  report.L = L;
  report.M = M;
  report.R = R;
  report.N = family.N();
  report.family_size = family.size();
  if (!family.uniquely_rooted_guaranteed()) report.notes.push_back("L = 1: chandeliers are not guaranteed uniquely rooted");
  if (!family.catalog().warning.empty()) report.notes.push_back(family.catalog().warning);

  const double log_n = std::log(static_cast<double>(config.n));
  report.exact_recovery_condition =
      config.n * config.q * (config.q + config.rho * (1.0 - config.q)) >= (1.0 + config.epsilon) * log_n;
  report.correlation_condition = config.rho * config.rho >= kOtterAlpha + config.epsilon;

  auto start = std::chrono::steady_clock::now();
  ScoreMatrix scores;
  if (config.exact) {
    scores = phi_exact(pair, family);
  } else {
    ApproxOptions options;
    options.t_override = config.t;
    options.t_cap = config.t_cap;
    options.seed = report.score_seed;
    options.flop_budget = config.flop_budget;
    options.use_cache = config.use_cache;
    options.threads = config.threads;
    scores = phi_approx(pair, family, options);
  }
  report.timings.ms_score = elapsed_ms(start);
  report.mu = scores.mu;
  report.r = scores.r;
  report.t = scores.t;

  start = std::chrono::steady_clock::now();
  report.tau = config.auto_tau ? threshold_data_driven(scores) : threshold_fixed(scores.mu, config.c);
  const PartialMatching initial = match_by_threshold(scores, report.tau);
  report.timings.ms_match = elapsed_ms(start);
  report.threshold_metrics = evaluate(initial, pair.pi);

  start = std::chrono::steady_clock::now();
  report.seeded_q = config.seeded_q.value_or(pair.empirical_density());
  PartialMatching final_matching = initial;
  if (!config.seeded) {
    report.notes.push_back("seeded completion disabled");
  } else if (config.n < 3) {
    report.notes.push_back("seeded completion skipped: n < 3");
  } else if (!(report.seeded_q > 0.0)) {
    report.notes.push_back("seeded completion skipped: empty graphs");
  } else {
    report.gamma = seeded_gamma(config.n, report.seeded_q);
    SeededStats stats;
    final_matching = seeded_match(pair.a, pair.b, initial, report.seeded_q, *report.gamma, &stats);
    report.seeded_added = stats.added;
  }
  report.timings.ms_seeded = elapsed_ms(start);
  report.final_metrics = evaluate(final_matching, pair.pi);
  return report;
}

namespace {

nlohmann::ordered_json metrics_json(const MatchMetrics& m) {
  nlohmann::ordered_json out;
  out["accuracy"] = m.accuracy;
  out["coverage"] = m.coverage;
  out["precision"] = m.precision;
  out["matched"] = m.matched;
  out["correct"] = m.correct;
  out["exact"] = m.exact;
  return out;
}

}  // namespace

std::string report_json(const PipelineReport& report, bool include_timings) {
  nlohmann::ordered_json out;
  out["schema_version"] = kConfigSchemaVersion;
  nlohmann::ordered_json config;
  for (const auto& [key, value] : report.config.to_key_values()) config[key] = value;
  out["config"] = config;
  out["rng"] = kRngAlgorithm;
  out["pair_seed"] = report.pair_seed;
  out["score_seed"] = report.score_seed;
  out["family"] = {{"K", report.K},         {"L", report.L}, {"M", report.M},
                   {"R", to_string(report.R)}, {"N", report.N}, {"size", report.family_size}};
  out["mu"] = report.mu;
  out["tau"] = report.tau;
  out["gamma"] = report.gamma ? nlohmann::ordered_json(*report.gamma) : nlohmann::ordered_json(nullptr);
  out["seeded_q"] = report.seeded_q;
  out["r"] = report.r;
  out["t"] = report.t;
  out["exact_recovery_condition"] = report.exact_recovery_condition;
  out["correlation_condition"] = report.correlation_condition;
  out["threshold"] = metrics_json(report.threshold_metrics);
  out["seeded_added"] = report.seeded_added;
  out["final"] = metrics_json(report.final_metrics);
  out["notes"] = report.notes;
  if (include_timings)
    out["timings_ms"] = {{"score", report.timings.ms_score},
                         {"match", report.timings.ms_match},
                         {"seeded", report.timings.ms_seeded}};
  return out.dump(2) + "\n";
}

void SweepConfig::apply(const KeyValues& values) {
  check_schema(values);
  KeyValues rest;
  for (const auto& [key, value] : values) {
    if (key == "ns") ns = parse_list<int>(key, value);
    else if (key == "qs") qs = parse_list<double>(key, value);
    else if (key == "rhos") rhos = parse_list<double>(key, value);
    else if (key == "trials") trials = parse_number<int>(key, value);
    else if (key == "deterministic") deterministic = parse_bool(key, value);
    else if (key == "workers") workers = parse_number<unsigned>(key, value);
    else rest[key] = value;
  }
  base.apply(rest);
  if (trials < 1) throw ParameterError("trials must be >= 1");
}

KeyValues SweepConfig::to_key_values() const {
  KeyValues out = base.to_key_values();
  out["ns"] = join(ns.empty() ? std::vector<int>{base.n} : ns);
  out["qs"] = join(qs.empty() ? std::vector<double>{base.q} : qs);
  out["rhos"] = join(rhos.empty() ? std::vector<double>{base.rho} : rhos);
  out["trials"] = std::to_string(trials);
  out["deterministic"] = deterministic ? "true" : "false";
  out["workers"] = std::to_string(workers);
  return out;
}

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  const auto ns = config.ns.empty() ? std::vector<int>{config.base.n} : config.ns;
  const auto qs = config.qs.empty() ? std::vector<double>{config.base.q} : config.qs;
  const auto rhos = config.rhos.empty() ? std::vector<double>{config.base.rho} : config.rhos;

  std::vector<PipelineConfig> jobs;
  std::vector<int> trial_of;
  std::uint64_t cell = 0;
  for (double rho : rhos) {
    for (double q : qs) {
      for (int n : ns) {
        for (int k = 0; k < config.trials; ++k) {
          PipelineConfig job = config.base;
          job.n = n;
          job.q = q;
          job.rho = rho;
          job.seed = derive_seed(derive_seed(config.base.seed, cell), static_cast<std::uint64_t>(k));
          // Cells already run in parallel.
          job.threads = 1;
          jobs.push_back(job);
          trial_of.push_back(k);
        }
        ++cell;
      }
    }
  }

  std::vector<SweepRow> rows(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  unsigned workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, jobs.size())));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
          try {
            rows[i].report = run_pipeline(jobs[i]);
            rows[i].trial = trial_of[i];
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& error : errors)
    if (error) std::rethrow_exception(error);
  return rows;
}

void write_sweep_csv(std::ostream& out, const SweepConfig& config, const std::vector<SweepRow>& rows) {
  out << "# schema_version=" << kConfigSchemaVersion << '\n';
  out << "# rng=" << kRngAlgorithm << '\n';
  for (const auto& [key, value] : config.to_key_values())
    if (key != "schema_version") out << "# " << key << '=' << value << '\n';
  out << kSweepHeader << '\n';
  for (const auto& row : rows) {
    const auto& r = row.report;
    const auto ms = [&](double v) { return config.deterministic ? std::string("0") : format_double(v); };
    out << r.config.n << ',' << format_double(r.config.q) << ',' << format_double(r.config.rho) << ',' << r.K << ','
        << r.L << ',' << r.M << ',' << to_string(r.R) << ',' << r.N << ',' << r.t << ',' << format_double(r.config.c)
        << ',' << row.trial << ',' << r.config.seed << ',' << format_double(r.final_metrics.accuracy) << ','
        << format_double(r.final_metrics.coverage) << ',' << (r.final_metrics.exact ? 1 : 0) << ','
        << ms(r.timings.ms_score) << ',' << ms(r.timings.ms_match) << ',' << ms(r.timings.ms_seeded) << '\n';
  }
}

}  // namespace cmatch
