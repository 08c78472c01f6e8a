#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "crmsim/mac.hpp"
#include "crmsim/params.hpp"
#include "crmsim/topology.hpp"

namespace crmsim {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  std::string field_path;
  ValidationError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), field_path(std::move(path)) {}
};

enum class TopologyKind { short_hop, chain, cross, random_area };
enum class FlowRule { region_pair, k_hop };

const char* topology_kind_name(TopologyKind k);
const char* flow_rule_name(FlowRule r);

// One experiment description: a topology generator and its knobs, traffic,
// the variants to compare, protocol parameter overrides, seeds and an
// optional one-dimensional sweep.
struct ScenarioConfig {
  std::string name = "scenario";

  TopologyKind kind = TopologyKind::chain;
  std::uint32_t nodes_per_region = 3;
  std::uint32_t regions = 5;      // chain
  std::uint32_t arm_regions = 2;  // cross
  double spacing_m = 500.0;
  double area_m = 2000.0;  // random
  std::uint32_t n_nodes = 12;
  double max_link_m = 600.0;

  TrafficMode mode = TrafficMode::saturated;
  double offered_rate_bits_per_s = 1e6;
  FlowRule flow_rule = FlowRule::region_pair;
  std::uint32_t k_hops = 2;
  double realtime_fraction = 1.0;

  std::vector<Variant> variants{Variant::ftkn_crm};
  ProtocolParams params;
  double duration_s = 5.0;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

  std::string sweep_key;  // empty: no sweep
  std::vector<double> sweep_values;

  SimTime duration_us() const { return to_sim_time(duration_s * 1e6); }
};

// Strict parser: unknown keys are rejected with their path, malformed JSON
// raises ParseError with the line carried in the message, and field
// invariants raise ValidationError.
ScenarioConfig parse_scenario(const std::string& text);

// Serialization inverse of parse_scenario (round-trips to an equal value).
std::string scenario_to_json(const ScenarioConfig& config);

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);
bool operator==(const ProtocolParams& a, const ProtocolParams& b);

// Assigns a swept value onto a dotted config path (numeric fields only).
void apply_sweep_value(ScenarioConfig& config, const std::string& key, double value);

// Instantiates the topology and flows for one seed.
ScenarioWorld build_world(const ScenarioConfig& config, std::uint64_t seed);

}  // namespace crmsim
