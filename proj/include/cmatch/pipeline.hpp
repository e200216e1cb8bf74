#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmatch/matchers.hpp"
#include "cmatch/model.hpp"
#include "cmatch/score.hpp"
#include "cmatch/trees.hpp"

namespace cmatch {

inline constexpr int kConfigSchemaVersion = 1;

/// Flat `key = value` configuration. Lines starting with `#` are comments.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in);
KeyValues read_key_values_file(const std::string& path);

struct PipelineConfig {
  int n = 100;
  double q = 0.1;
  double rho = 1.0;
  PiMode pi_mode = PiMode::uniform;
  std::uint64_t seed = 1;
  bool auto_params = false;  // choose K, L, M, R from (n, q, rho, epsilon)
  int K = 2;
  int L = 2;
  int M = 1;
  u128 R = kUnboundedAut;
  double epsilon = 0.1;
  bool exact = false;
  std::optional<std::uint64_t> t;
  std::uint64_t t_cap = 10000;
  double c = 0.5;
  bool auto_tau = false;
  std::optional<double> seeded_q;  // defaults to the empirical density
  bool seeded = true;
  double flop_budget = 1e13;
  bool use_cache = true;
  unsigned threads = 0;

  /// Unknown keys and malformed values throw ParameterError. A schema_version
  /// other than the current one is rejected.
  void apply(const KeyValues& values);
  KeyValues to_key_values() const;
};

struct StageTimings {
  double ms_score = 0.0;
  double ms_match = 0.0;
  double ms_seeded = 0.0;
};

struct PipelineReport {
  PipelineConfig config;
  int K = 0;
  int L = 0;
  int M = 0;
  int N = 0;
  u128 R = kUnboundedAut;
  std::uint64_t family_size = 0;
  double mu = 0.0;
  double tau = 0.0;
  std::optional<double> gamma;
  double seeded_q = 0.0;
  double r = 1.0;
  std::uint64_t t = 0;
  std::uint64_t pair_seed = 0;
  std::uint64_t score_seed = 0;
  bool exact_recovery_condition = false;  // n q (q + rho (1 - q)) >= (1 + epsilon) log n
  bool correlation_condition = false;     // rho^2 >= alpha + epsilon
  MatchMetrics threshold_metrics;
  MatchMetrics final_metrics;
  std::size_t seeded_added = 0;
  std::vector<std::string> notes;
  StageTimings timings;
};

PipelineReport run_pipeline(const PipelineConfig& config);

/// JSON report. Timings are included only on request so that reports from equal
/// seeds compare byte for byte.
std::string report_json(const PipelineReport& report, bool include_timings);

struct SweepConfig {
  PipelineConfig base;
  std::vector<int> ns;
  std::vector<double> qs;
  std::vector<double> rhos;
  int trials = 1;
  bool deterministic = false;  // write 0 for wall times
  unsigned workers = 0;        // 0: hardware concurrency

  void apply(const KeyValues& values);
  KeyValues to_key_values() const;
};

struct SweepRow {
  PipelineReport report;
  int trial = 0;
};

inline constexpr const char* kSweepHeader =
    "n,q,rho,K,L,M,R,N,t,c,trial,seed,acc,coverage,exact,ms_score,ms_match,ms_seeded";

/// Cells are the cartesian product rho x q x n (n varies fastest). Trial `k` of
/// cell `c` uses seed derive_seed(derive_seed(base.seed, c), k).
std::vector<SweepRow> run_sweep(const SweepConfig& config);
void write_sweep_csv(std::ostream& out, const SweepConfig& config, const std::vector<SweepRow>& rows);

}  // namespace cmatch
