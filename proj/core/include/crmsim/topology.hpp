#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "crmsim/packet.hpp"
#include "crmsim/rng.hpp"

namespace crmsim {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

// Unit-disk topology: nodes hear each other iff their distance is within
// tx_range_m. Adjacency is derived from positions and symmetric by
// construction.
struct Topology {
  std::vector<Position> positions;
  double tx_range_m = 750.0;
  std::vector<std::vector<NodeId>> adjacency;  // sorted neighbor lists
  std::vector<int> region_of;                  // generator-assigned region index, -1 if none

  std::size_t node_count() const { return positions.size(); }
  bool in_range(NodeId a, NodeId b) const;
  double distance(NodeId a, NodeId b) const;
};

void build_adjacency(Topology& topo);
bool is_connected(const Topology& topo);

struct Flow {
  NodeId source = kNoNode;
  NodeId destination = kNoNode;
};

enum class TrafficMode { saturated, offered_load };

struct TrafficSpec {
  TrafficMode mode = TrafficMode::saturated;
  double offered_rate_bits_per_s = 1e6;  // per flow, offered_load mode
  double realtime_fraction = 1.0;
  std::uint32_t packet_bytes = 1500;
  std::vector<Flow> flows;
};

struct ScenarioWorld {
  Topology topology;
  TrafficSpec traffic;
};

struct GenerationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Unreachable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Three side-by-side regions; the outer two exchange saturated flows that
// must relay through the middle (outer regions are mutually out of range).
ScenarioWorld make_short_hop(std::uint32_t n_per_region, std::uint64_t seed);

// Chain of regions spaced so only adjacent regions hear each other;
// end-region nodes exchange flows across every intermediate region.
ScenarioWorld make_chain(std::uint32_t regions, std::uint32_t n_per_region, double spacing_m,
                         std::uint64_t seed);

// Two chains sharing their center region; both axes run end-to-end flows
// through it.
ScenarioWorld make_cross(std::uint32_t arm_regions, std::uint32_t n_per_region, double spacing_m,
                         std::uint64_t seed);

// Uniform placement in a square, rejection-sampled until the disk graph is
// connected and every node has a neighbor within max_link_m.
Topology make_random(double area_m, std::uint32_t n_nodes, double max_link_m, std::uint64_t seed);

// Flows whose destinations are exactly k route hops away; nodes without a
// k-hop candidate generate no traffic.
std::vector<Flow> k_hop_flows(const Topology& topo, std::uint32_t k, std::uint64_t seed);

// next_hop[node][dest]; kNoNode on the diagonal. Shortest-hop BFS routes,
// ties broken toward the lowest next-hop id.
class RouteTable {
 public:
  static RouteTable build(const Topology& topo);

  NodeId next_hop(NodeId from, NodeId dest) const { return table_[from][dest]; }
  std::uint32_t hop_count(NodeId from, NodeId dest) const { return dist_[from][dest]; }

 private:
  std::vector<std::vector<NodeId>> table_;
  std::vector<std::vector<std::uint32_t>> dist_;
};

}  // namespace crmsim
