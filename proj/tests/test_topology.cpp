#include <doctest.h>

#include <deque>
#include <limits>
#include <set>

#include "crmsim/topology.hpp"

using namespace crmsim;

namespace {

// Independent BFS distance oracle.
std::vector<std::uint32_t> bfs_dist(const Topology& topo, NodeId from) {
  std::vector<std::uint32_t> d(topo.node_count(), std::numeric_limits<std::uint32_t>::max());
  std::deque<NodeId> q{from};
  d[from] = 0;
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop_front();
    for (NodeId v : topo.adjacency[u]) {
      if (d[v] == std::numeric_limits<std::uint32_t>::max()) {
        d[v] = d[u] + 1;
        q.push_back(v);
      }
    }
  }
  return d;
}

}  // namespace

TEST_CASE("short-hop regions force two-hop relaying") {
  const std::uint32_t n = 4;
  const ScenarioWorld world = make_short_hop(n, 42);
  const Topology& topo = world.topology;
  REQUIRE(topo.node_count() == 3 * n);

  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = 2 * n; b < 3 * n; ++b) {
      CHECK_FALSE(topo.in_range(a, b));  // outer regions never hear each other
    }
    for (NodeId m = n; m < 2 * n; ++m) {
      CHECK(topo.in_range(a, m));  // every outer node hears every middle node
    }
  }

  const RouteTable routes = RouteTable::build(topo);
  for (const Flow& f : world.traffic.flows) {
    CHECK(routes.hop_count(f.source, f.destination) == 2);
    const NodeId relay = routes.next_hop(f.source, f.destination);
    CHECK(topo.region_of[relay] == 1);
  }
  // Middle-region nodes source no traffic.
  for (const Flow& f : world.traffic.flows) CHECK(topo.region_of[f.source] != 1);
  CHECK(world.traffic.mode == TrafficMode::saturated);
}

TEST_CASE("chain regions connect only to adjacent regions") {
  const ScenarioWorld world = make_chain(5, 3, 500.0, 7);
  const Topology& topo = world.topology;
  REQUIRE(topo.node_count() == 15);

  for (NodeId a = 0; a < topo.node_count(); ++a) {
    for (NodeId b = a + 1; b < topo.node_count(); ++b) {
      const int dr = std::abs(topo.region_of[a] - topo.region_of[b]);
      if (dr <= 1) CHECK(topo.in_range(a, b));
      if (dr >= 2) CHECK_FALSE(topo.in_range(a, b));
    }
  }

  const RouteTable routes = RouteTable::build(topo);
  for (const Flow& f : world.traffic.flows) CHECK(routes.hop_count(f.source, f.destination) == 4);
}

TEST_CASE("cross chains share the center region on both axes") {
  const ScenarioWorld world = make_cross(2, 3, 500.0, 3);
  const Topology& topo = world.topology;
  REQUIRE(topo.node_count() == 9 * 3);
  const RouteTable routes = RouteTable::build(topo);

  for (const Flow& f : world.traffic.flows) {
    CHECK(routes.hop_count(f.source, f.destination) == 4);
    // Walk the route; it must pass through the center region (region 0).
    bool through_center = false;
    NodeId at = f.source;
    while (at != f.destination) {
      at = routes.next_hop(at, f.destination);
      if (topo.region_of[at] == 0) through_center = true;
    }
    CHECK(through_center);
  }
}

TEST_CASE("random placement is connected, seed-stable, and honors the link cap") {
  const Topology a = make_random(2000.0, 12, 600.0, 99);
  const Topology b = make_random(2000.0, 12, 600.0, 99);
  REQUIRE(a.node_count() == 12);
  CHECK(is_connected(a));
  for (NodeId i = 0; i < a.node_count(); ++i) {
    CHECK(a.positions[i].x == b.positions[i].x);
    CHECK(a.positions[i].y == b.positions[i].y);
    double nearest = std::numeric_limits<double>::infinity();
    for (NodeId j = 0; j < a.node_count(); ++j) {
      if (i != j) nearest = std::min(nearest, a.distance(i, j));
    }
    CHECK(nearest <= 600.0);
  }
  const Topology c = make_random(2000.0, 12, 600.0, 100);
  bool differs = false;
  for (NodeId i = 0; i < c.node_count(); ++i)
    differs = differs || c.positions[i].x != a.positions[i].x;
  CHECK(differs);
}

TEST_CASE("random generation fails cleanly when constraints are unsatisfiable") {
  CHECK_THROWS_AS(make_random(2000.0, 3, 1.0, 5), GenerationFailed);
}

TEST_CASE("k-hop flows pick destinations exactly k route hops away") {
  const Topology topo = make_random(2000.0, 14, 600.0, 21);
  const RouteTable routes = RouteTable::build(topo);
  const auto flows = k_hop_flows(topo, 2, 21);
  CHECK(!flows.empty());
  for (const Flow& f : flows) CHECK(routes.hop_count(f.source, f.destination) == 2);
}

TEST_CASE("routes are shortest paths with lowest-id tie breaking") {
  const Topology topo = make_random(2000.0, 10, 700.0, 5);
  const RouteTable routes = RouteTable::build(topo);

  for (NodeId dest = 0; dest < topo.node_count(); ++dest) {
    const auto d = bfs_dist(topo, dest);
    for (NodeId from = 0; from < topo.node_count(); ++from) {
      if (from == dest) continue;
      CHECK(routes.hop_count(from, dest) == d[from]);
      const NodeId hop = routes.next_hop(from, dest);
      CHECK(d[hop] == d[from] - 1);
      // No eligible neighbor has a lower id.
      for (NodeId nb : topo.adjacency[from]) {
        if (nb >= hop) break;
        CHECK(d[nb] != d[from] - 1);
      }
    }
  }
}

TEST_CASE("adjacent pair routes directly and disconnection is reported") {
  Topology topo;
  topo.positions = {{0, 0}, {500, 0}};
  build_adjacency(topo);
  const RouteTable routes = RouteTable::build(topo);
  CHECK(routes.hop_count(0, 1) == 1);
  CHECK(routes.next_hop(0, 1) == 1);

  Topology split;
  split.positions = {{0, 0}, {5000, 0}};
  build_adjacency(split);
  CHECK_THROWS_AS(RouteTable::build(split), Unreachable);
}
