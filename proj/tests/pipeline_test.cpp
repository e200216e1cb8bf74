#include <doctest.h>

#include <sstream>

#include "cmatch/errors.hpp"
#include "cmatch/pipeline.hpp"

using namespace cmatch;

namespace {

PipelineConfig small_config() {
  PipelineConfig c;
  c.n = 60;
  c.q = 0.15;
  c.rho = 1.0;
  c.t = 20;
  c.seed = 4;
  return c;
}

std::size_t count_lines(const std::string& text, bool data_only) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line))
    if (!data_only || (line[0] != '#' && line.rfind("n,", 0) != 0)) ++n;
  return n;
}

}  // namespace

TEST_CASE("key-value parsing") {
  std::istringstream text("# comment\nschema_version = 1\n n=40 \nq=0.2\n\nR = inf\nt = auto\n");
  const KeyValues kv = parse_key_values(text);
  CHECK(kv.at("n") == "40");
  PipelineConfig c;
  c.apply(kv);
  CHECK(c.n == 40);
  CHECK(c.q == 0.2);
  CHECK(c.R == kUnboundedAut);
  CHECK_FALSE(c.t.has_value());

  PipelineConfig back;
  back.apply(c.to_key_values());
  CHECK(back.to_key_values() == c.to_key_values());

  CHECK_THROWS_AS(c.apply({{"bogus", "1"}}), ParameterError);
  CHECK_THROWS_AS(c.apply({{"schema_version", "2"}}), ParameterError);
  CHECK_THROWS_AS(c.apply({{"n", "4x"}}), ParameterError);
  std::istringstream broken("n 40\n");
  CHECK_THROWS_AS(parse_key_values(broken), ParameterError);
}

TEST_CASE("pipeline report is byte-identical for equal seeds") {
  const auto config = small_config();
  const std::string first = report_json(run_pipeline(config), false);
  const std::string second = report_json(run_pipeline(config), false);
  CHECK(first == second);
  auto other = config;
  other.seed = 5;
  CHECK(report_json(run_pipeline(other), false) != first);
  CHECK(report_json(run_pipeline(config), true).find("timings_ms") != std::string::npos);
  CHECK(first.find("timings_ms") == std::string::npos);
}

TEST_CASE("pipeline perfect-correlation smoke case") {
  const PipelineReport report = run_pipeline(small_config());
  CHECK(report.exact_recovery_condition);
  CHECK(report.correlation_condition);
  CHECK(report.N == 6);
  CHECK(report.family_size == 1);
  CHECK(report.t == 20);
  CHECK(report.gamma.has_value());
  CHECK(report.final_metrics.matched >= report.threshold_metrics.matched);
}

TEST_CASE("pipeline n = 2 degenerates gracefully") {
  PipelineConfig c = small_config();
  c.n = 2;
  c.q = 0.5;
  const PipelineReport report = run_pipeline(c);
  CHECK_FALSE(report.gamma.has_value());
  CHECK(report.mu == 0.0);
  CHECK_FALSE(report.notes.empty());
  CHECK_FALSE(report_json(report, false).empty());
}

TEST_CASE("sweep shape and reproducibility") {
  SweepConfig one;
  one.base = small_config();
  one.base.n = 30;
  one.deterministic = true;
  std::ostringstream a;
  write_sweep_csv(a, one, run_sweep(one));
  CHECK(count_lines(a.str(), true) == 1);
  CHECK(a.str().find(std::string(kSweepHeader) + "\n") != std::string::npos);
  CHECK(a.str().find("# seed=4") != std::string::npos);

  SweepConfig grid = one;
  grid.ns = {20, 30};
  grid.rhos = {0.5, 1.0};
  grid.trials = 3;
  grid.workers = 2;
  const auto rows = run_sweep(grid);
  CHECK(rows.size() == 12);
  std::ostringstream b, c;
  write_sweep_csv(b, grid, rows);
  write_sweep_csv(c, grid, run_sweep(grid));
  CHECK(b.str() == c.str());
  CHECK(count_lines(b.str(), true) == 12);
  CHECK(rows[0].report.config.seed != rows[1].report.config.seed);
}
