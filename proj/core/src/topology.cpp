#include "crmsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace crmsim {

namespace {

constexpr double kRegionHalfWidth = 100.0;
constexpr double kRegionHalfHeight = 100.0;
constexpr double kChainHalfExtent = 75.0;

Position random_in_box(Rng& rng, double cx, double cy, double hx, double hy) {
  return {rng.uniform(cx - hx, cx + hx), rng.uniform(cy - hy, cy + hy)};
}

}  // namespace

bool Topology::in_range(NodeId a, NodeId b) const { return distance(a, b) <= tx_range_m; }

double Topology::distance(NodeId a, NodeId b) const {
  const double dx = positions[a].x - positions[b].x;
  const double dy = positions[a].y - positions[b].y;
  return std::sqrt(dx * dx + dy * dy);
}

void build_adjacency(Topology& topo) {
  const std::size_t n = topo.node_count();
  topo.adjacency.assign(n, {});
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) {
      if (topo.in_range(a, b)) {
        topo.adjacency[a].push_back(b);
        topo.adjacency[b].push_back(a);
      }
    }
  }
}

bool is_connected(const Topology& topo) {
  const std::size_t n = topo.node_count();
  if (n == 0) return false;
  std::vector<bool> seen(n, false);
  std::deque<NodeId> frontier{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    for (NodeId v : topo.adjacency[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        frontier.push_back(v);
      }
    }
  }
  return reached == n;
}

ScenarioWorld make_short_hop(std::uint32_t n_per_region, std::uint64_t seed) {
  if (n_per_region < 1) throw GenerationFailed("short_hop: n_per_region must be >= 1");
  Rng rng(seed, 0x7059);
  ScenarioWorld world;
  Topology& topo = world.topology;
  // Region centers 500 m apart: outer regions are always beyond the 750 m
  // range of each other while every outer node hears every middle node.
  const double centers[3] = {0.0, 500.0, 1000.0};
  for (int r = 0; r < 3; ++r) {
    for (std::uint32_t i = 0; i < n_per_region; ++i) {
      topo.positions.push_back(
          random_in_box(rng, centers[r], 0.0, kRegionHalfWidth, kRegionHalfHeight));
      topo.region_of.push_back(r);
    }
  }
  build_adjacency(topo);

  world.traffic.mode = TrafficMode::saturated;
  for (std::uint32_t i = 0; i < n_per_region; ++i) {
    const NodeId left = i;
    const NodeId right = 2 * n_per_region + i;
    world.traffic.flows.push_back({left, right});
    world.traffic.flows.push_back({right, left});
  }
  return world;
}

ScenarioWorld make_chain(std::uint32_t regions, std::uint32_t n_per_region, double spacing_m,
                         std::uint64_t seed) {
  if (regions < 2) throw GenerationFailed("chain: regions must be >= 2");
  if (n_per_region < 1) throw GenerationFailed("chain: n_per_region must be >= 1");
  Rng rng(seed, 0xC4A1);
  ScenarioWorld world;
  Topology& topo = world.topology;
  for (std::uint32_t r = 0; r < regions; ++r) {
    for (std::uint32_t i = 0; i < n_per_region; ++i) {
      topo.positions.push_back(random_in_box(rng, r * spacing_m, 0.0, kChainHalfExtent,
                                             kChainHalfExtent));
      topo.region_of.push_back(static_cast<int>(r));
    }
  }
  build_adjacency(topo);

  world.traffic.mode = TrafficMode::saturated;
  for (std::uint32_t i = 0; i < n_per_region; ++i) {
    const NodeId head = i;
    const NodeId tail = (regions - 1) * n_per_region + i;
    world.traffic.flows.push_back({head, tail});
    world.traffic.flows.push_back({tail, head});
  }
  return world;
}

ScenarioWorld make_cross(std::uint32_t arm_regions, std::uint32_t n_per_region, double spacing_m,
                         std::uint64_t seed) {
  if (arm_regions < 1) throw GenerationFailed("cross: arm_regions must be >= 1");
  if (n_per_region < 1) throw GenerationFailed("cross: n_per_region must be >= 1");
  Rng rng(seed, 0xC805);
  ScenarioWorld world;
  Topology& topo = world.topology;

  // Region layout: center first, then the four arms outward
  // (east, west, north, south), arm_regions regions each.
  std::vector<Position> centers{{0.0, 0.0}};
  for (std::uint32_t k = 1; k <= arm_regions; ++k) centers.push_back({k * spacing_m, 0.0});
  for (std::uint32_t k = 1; k <= arm_regions; ++k) centers.push_back({-(k * spacing_m), 0.0});
  for (std::uint32_t k = 1; k <= arm_regions; ++k) centers.push_back({0.0, k * spacing_m});
  for (std::uint32_t k = 1; k <= arm_regions; ++k) centers.push_back({0.0, -(k * spacing_m)});

  for (std::size_t r = 0; r < centers.size(); ++r) {
    for (std::uint32_t i = 0; i < n_per_region; ++i) {
      topo.positions.push_back(
          random_in_box(rng, centers[r].x, centers[r].y, kChainHalfExtent, kChainHalfExtent));
      topo.region_of.push_back(static_cast<int>(r));
    }
  }
  build_adjacency(topo);

  const auto region_base = [&](std::uint32_t region) { return region * n_per_region; };
  const std::uint32_t east_tip = 1 + (arm_regions - 1);
  const std::uint32_t west_tip = arm_regions + arm_regions;
  const std::uint32_t north_tip = 2 * arm_regions + arm_regions;
  const std::uint32_t south_tip = 3 * arm_regions + arm_regions;

  world.traffic.mode = TrafficMode::saturated;
  for (std::uint32_t i = 0; i < n_per_region; ++i) {
    const NodeId e = region_base(east_tip) + i;
    const NodeId w = region_base(west_tip) + i;
    const NodeId n = region_base(north_tip) + i;
    const NodeId s = region_base(south_tip) + i;
    world.traffic.flows.push_back({e, w});
    world.traffic.flows.push_back({w, e});
    world.traffic.flows.push_back({n, s});
    world.traffic.flows.push_back({s, n});
  }
  return world;
}

Topology make_random(double area_m, std::uint32_t n_nodes, double max_link_m,
                     std::uint64_t seed) {
  if (n_nodes < 2) throw GenerationFailed("random: n_nodes must be >= 2");
  Rng rng(seed, 0xA4EA);
  constexpr int kMaxRounds = 1000;
  for (int round = 0; round < kMaxRounds; ++round) {
    Topology topo;
    topo.region_of.assign(n_nodes, -1);
    for (std::uint32_t i = 0; i < n_nodes; ++i)
      topo.positions.push_back({rng.uniform(0.0, area_m), rng.uniform(0.0, area_m)});
    build_adjacency(topo);
    if (!is_connected(topo)) continue;
    bool nearest_ok = true;
    for (NodeId a = 0; a < n_nodes && nearest_ok; ++a) {
      double nearest = std::numeric_limits<double>::infinity();
      for (NodeId b = 0; b < n_nodes; ++b) {
        if (a != b) nearest = std::min(nearest, topo.distance(a, b));
      }
      nearest_ok = nearest <= max_link_m;
    }
    if (nearest_ok) return topo;
  }
  throw GenerationFailed("random: no connected placement within the rejection budget");
}

std::vector<Flow> k_hop_flows(const Topology& topo, std::uint32_t k, std::uint64_t seed) {
  Rng rng(seed, 0xF107);
  const RouteTable routes = RouteTable::build(topo);
  std::vector<Flow> flows;
  for (NodeId src = 0; src < topo.node_count(); ++src) {
    std::vector<NodeId> candidates;
    for (NodeId dst = 0; dst < topo.node_count(); ++dst) {
      if (dst != src && routes.hop_count(src, dst) == k) candidates.push_back(dst);
    }
    if (candidates.empty()) continue;
    flows.push_back({src, candidates[rng.uniform_inclusive(candidates.size() - 1)]});
  }
  return flows;
}

RouteTable RouteTable::build(const Topology& topo) {
  const std::size_t n = topo.node_count();
  RouteTable rt;
  rt.table_.assign(n, std::vector<NodeId>(n, kNoNode));
  rt.dist_.assign(n, std::vector<std::uint32_t>(n, std::numeric_limits<std::uint32_t>::max()));

  // BFS from each destination; a node's next hop toward it is its lowest-id
  // neighbor one step closer.
  for (NodeId dest = 0; dest < n; ++dest) {
    std::vector<std::uint32_t> d(n, std::numeric_limits<std::uint32_t>::max());
    std::deque<NodeId> frontier{dest};
    d[dest] = 0;
    while (!frontier.empty()) {
      const NodeId u = frontier.front();
      frontier.pop_front();
      for (NodeId v : topo.adjacency[u]) {
        if (d[v] == std::numeric_limits<std::uint32_t>::max()) {
          d[v] = d[u] + 1;
          frontier.push_back(v);
        }
      }
    }
    for (NodeId from = 0; from < n; ++from) {
      rt.dist_[from][dest] = d[from];
      if (from == dest || d[from] == std::numeric_limits<std::uint32_t>::max()) continue;
      for (NodeId v : topo.adjacency[from]) {  // adjacency is sorted: first hit is lowest id
        if (d[v] == d[from] - 1) {
          rt.table_[from][dest] = v;
          break;
        }
      }
    }
  }
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = 0; b < n; ++b) {
      if (a != b && rt.table_[a][b] == kNoNode)
        throw Unreachable("route table: disconnected node pair");
    }
  }
  return rt;
}

}  // namespace crmsim
