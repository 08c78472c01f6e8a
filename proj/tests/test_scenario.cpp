#include <doctest.h>

#include <sstream>

#include "crmsim/runner.hpp"
#include "crmsim/scenario.hpp"

using namespace crmsim;

TEST_CASE("minimal config falls back to defaults everywhere") {
  const auto c = parse_scenario(R"({"topology": {"kind": "chain"}, "variants": ["ftkn_crm"]})");
  CHECK(c.kind == TopologyKind::chain);
  CHECK(c.regions == 5);
  CHECK(c.nodes_per_region == 3);
  CHECK(c.variants == std::vector<Variant>{Variant::ftkn_crm});
  CHECK(c.seeds.size() == 5);
  CHECK(c.duration_s == 5.0);
  CHECK(c.params.th_res == doctest::Approx(0.6));
}

TEST_CASE("unknown keys are rejected with their path") {
  CHECK_THROWS_AS(parse_scenario(R"({"topology": {"kind": "chain"}, "bogus": 1})"),
                  ValidationError);
  try {
    parse_scenario(R"({"topology": {"kind": "chain", "sides": 3}})");
    FAIL("expected rejection");
  } catch (const ValidationError& e) {
    CHECK(e.field_path == "topology.sides");
  }
}

TEST_CASE("zero reservation share is rejected at validation") {
  try {
    parse_scenario(R"({"topology": {"kind": "chain"}, "params": {"th_res": 0.0}})");
    FAIL("expected rejection");
  } catch (const ValidationError& e) {
    CHECK(e.field_path == "params.th_res");
  }
}

TEST_CASE("malformed json raises a parse error carrying the line") {
  try {
    parse_scenario("{\n  \"topology\": {\n");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("config round-trips through serialization") {
  const auto c = parse_scenario(R"({
    "name": "rt",
    "topology": {"kind": "random", "n_nodes": 10, "area_m": 1500, "max_link_m": 550},
    "traffic": {"mode": "offered_load", "offered_rate_bits_per_s": 2.5e6,
                "flow_rule": "k_hop", "k": 2, "realtime_fraction": 0.75},
    "variants": ["baseline_csma", "ftkn_crm"],
    "params": {"th_res": 0.7, "clamp_mode": "lambda", "t_access_us": 500},
    "duration_s": 1.5,
    "seeds": [3, 4],
    "sweep": {"key": "traffic.offered_rate_bits_per_s", "values": [1e6, 2e6]}
  })");
  const auto again = parse_scenario(scenario_to_json(c));
  CHECK(again == c);
}

TEST_CASE("flow rules are tied to topology families") {
  CHECK_THROWS_AS(
      parse_scenario(
          R"({"topology": {"kind": "random"}, "traffic": {"flow_rule": "region_pair"}})"),
      ValidationError);
  CHECK_THROWS_AS(
      parse_scenario(R"({"topology": {"kind": "chain"}, "traffic": {"flow_rule": "k_hop"}})"),
      ValidationError);
}

TEST_CASE("sweep values map onto config fields") {
  auto c = parse_scenario(R"({"topology": {"kind": "chain"}})");
  apply_sweep_value(c, "params.fixed_offset_us", 12000.0);
  CHECK(c.params.fixed_offset_us == 12000);
  apply_sweep_value(c, "traffic.offered_rate_bits_per_s", 3e6);
  CHECK(c.offered_rate_bits_per_s == doctest::Approx(3e6));
  CHECK_THROWS_AS(apply_sweep_value(c, "params.nonsense", 1.0), ValidationError);
}

TEST_CASE("tiny matrix runs, aggregates, and emits locale-independent csv") {
  auto c = parse_scenario(R"({
    "name": "tiny",
    "topology": {"kind": "chain", "regions": 2, "nodes_per_region": 1},
    "traffic": {"mode": "offered_load", "offered_rate_bits_per_s": 200000},
    "variants": ["baseline_csma"],
    "duration_s": 0.3,
    "seeds": [1, 2]
  })");
  RunnerOptions opts;
  opts.workers = 2;
  const MatrixResult result = run_matrix(c, opts);
  REQUIRE(result.runs.size() == 2);
  REQUIRE(result.points.size() == 1);
  CHECK_FALSE(result.any_error());
  CHECK(result.points[0].seed_count == 2);
  CHECK(result.points[0].throughput_mean > 0.0);

  // Aggregate means must be recomputable from the per-seed rows.
  double sum = 0.0;
  for (const RunRow& row : result.runs) sum += row.report.end_to_end_throughput_bits_per_s;
  CHECK(result.points[0].throughput_mean == doctest::Approx(sum / 2.0));

  std::ostringstream summary;
  write_summary_csv(result, summary);
  const std::string text = summary.str();
  CHECK(text.find("scenario,variant,sweep_value,seed_count,throughput_mean") == 0);
  CHECK(text.find("tiny,baseline_csma") != std::string::npos);

  std::ostringstream runs;
  write_runs_csv(result, runs);
  CHECK(runs.str().find("tiny,baseline_csma,,1,") != std::string::npos);
}

TEST_CASE("a failing cell yields an error row without aborting the matrix") {
  auto c = parse_scenario(R"({
    "name": "failing",
    "topology": {"kind": "random", "n_nodes": 3, "max_link_m": 1.0},
    "traffic": {"flow_rule": "k_hop", "k": 2},
    "variants": ["baseline_csma"],
    "duration_s": 0.1,
    "seeds": [1]
  })");
  const MatrixResult result = run_matrix(c);
  REQUIRE(result.runs.size() == 1);
  CHECK(result.any_error());
  CHECK_FALSE(result.runs[0].ok());
}
