#include <doctest.h>

#include <map>
#include <vector>

#include "crmsim/rng.hpp"
#include "crmsim/wra.hpp"

using namespace crmsim;

namespace {

QueuedPacket pkt(std::uint32_t bytes, std::uint32_t hops) {
  QueuedPacket p;
  p.length_bytes = bytes;
  p.hop_count = hops;
  return p;
}

// Independent oracle: bucket queue bytes by forward count, then evaluate the
// weighted sum term by term.
double wra_oracle(const std::vector<QueuedPacket>& queue, const ProtocolParams& p) {
  std::map<std::uint32_t, double> bytes_by_hops;
  for (const QueuedPacket& q : queue) bytes_by_hops[q.hop_count] += q.length_bytes;
  double total = 0.0;
  for (const auto& [hops, bytes] : bytes_by_hops)
    total += (hops == 0 ? p.weight_local : p.weight_relay) * bytes;
  return total;
}

NeighborRecord rec(NodeId id, double wra) {
  NeighborRecord r;
  r.node = id;
  r.wra = wra;
  r.last_heard = 0;
  r.hop_distance = 1;
  return r;
}

}  // namespace

TEST_CASE("queue weight examples") {
  const ProtocolParams p = default_params();
  CHECK(compute_wra({}, p) == 0.0);

  std::vector<QueuedPacket> one_local{pkt(1500, 0)};
  CHECK(compute_wra(one_local, p) == doctest::Approx(600.0).epsilon(1e-12));

  std::vector<QueuedPacket> mixed{pkt(1500, 0), pkt(1500, 0), pkt(1500, 1)};
  CHECK(compute_wra(mixed, p) == doctest::Approx(2700.0).epsilon(1e-12));
}

TEST_CASE("queue weight matches the bucketed oracle on random queues") {
  const ProtocolParams p = default_params();
  Rng rng(7, 1);
  for (int iter = 0; iter < 500; ++iter) {
    std::vector<QueuedPacket> queue;
    const std::size_t n = rng.uniform_inclusive(50);
    for (std::size_t i = 0; i < n; ++i)
      queue.push_back(pkt(1 + static_cast<std::uint32_t>(rng.uniform_inclusive(2999)),
                          static_cast<std::uint32_t>(rng.uniform_inclusive(5))));
    const double got = compute_wra(queue, p);
    const double want = wra_oracle(queue, p);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
    CHECK(got >= 0.0);
    CHECK((got == 0.0) == queue.empty());
  }
}

TEST_CASE("queue weight is additive and scale-covariant") {
  const ProtocolParams p = default_params();
  Rng rng(11, 2);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<QueuedPacket> a, b;
    for (std::size_t i = rng.uniform_inclusive(20); i > 0; --i)
      a.push_back(pkt(1 + static_cast<std::uint32_t>(rng.uniform_inclusive(1999)),
                      static_cast<std::uint32_t>(rng.uniform_inclusive(4))));
    for (std::size_t i = rng.uniform_inclusive(20); i > 0; --i)
      b.push_back(pkt(1 + static_cast<std::uint32_t>(rng.uniform_inclusive(1999)),
                      static_cast<std::uint32_t>(rng.uniform_inclusive(4))));
    std::vector<QueuedPacket> both = a;
    both.insert(both.end(), b.begin(), b.end());
    CHECK(compute_wra(both, p) ==
          doctest::Approx(compute_wra(a, p) + compute_wra(b, p)).epsilon(1e-12));

    std::vector<QueuedPacket> doubled = a;
    for (QueuedPacket& q : doubled) q.length_bytes *= 2;
    CHECK(compute_wra(doubled, p) == doctest::Approx(2.0 * compute_wra(a, p)).epsilon(1e-12));
  }
}

TEST_CASE("relay-only queues outweigh local-only queues of equal bytes") {
  const ProtocolParams p = default_params();
  std::vector<QueuedPacket> relay{pkt(1500, 2), pkt(4500, 1)};
  std::vector<QueuedPacket> local{pkt(3000, 0), pkt(3000, 0)};
  CHECK(compute_wra(relay, p) > compute_wra(local, p));
}

TEST_CASE("correction factor examples") {
  std::vector<NeighborRecord> three{rec(1, 900), rec(2, 900), rec(3, 900)};
  auto r = compute_lambda(2700.0, three);
  CHECK(r.status == LambdaStatus::ok);
  CHECK(r.value == doctest::Approx(3.0).epsilon(1e-12));

  for (double x : {1.0, 42.5, 90000.0}) {
    std::vector<NeighborRecord> self_like{rec(1, x), rec(2, x), rec(3, x), rec(4, x)};
    CHECK(compute_lambda(x, self_like).value == 1.0);  // exact
  }

  std::vector<NeighborRecord> one{rec(1, 900)};
  CHECK(compute_lambda(0.0, one).value == 0.0);
}

TEST_CASE("correction factor error statuses") {
  CHECK(compute_lambda(100.0, {}).status == LambdaStatus::empty_contention_set);
  std::vector<NeighborRecord> silent{rec(1, 0.0), rec(2, 0.0)};
  CHECK(compute_lambda(100.0, silent).status == LambdaStatus::zero_neighbor_load);
}

TEST_CASE("congestion threshold examples") {
  ProtocolParams p = default_params();
  CHECK(congestion_wra_threshold(p) == doctest::Approx(42000.0).epsilon(1e-12));
  p.th_buffer = 0.0;
  CHECK(congestion_wra_threshold(p) == 0.0);
  p.th_buffer = 1.0;
  CHECK(congestion_wra_threshold(p) == doctest::Approx(105000.0).epsilon(1e-12));
}

TEST_CASE("congestion detection uses a weak inequality on the max record") {
  std::vector<NeighborRecord> at{rec(1, 42000), rec(2, 10)};
  CHECK(is_any_neighbor_congested(at, 42000.0));
  CHECK_FALSE(is_any_neighbor_congested({}, 42000.0));
  std::vector<NeighborRecord> below{rec(1, 41999)};
  CHECK_FALSE(is_any_neighbor_congested(below, 42000.0));
}

TEST_CASE("neighbor records expire after the staleness horizon") {
  const ProtocolParams p = default_params();
  NeighborTable table;
  table.hear(1, 500.0, 0, 1);
  table.hear(2, 700.0, 150000, 2);
  const SimTime horizon = 4 * p.wra_update_period_us;
  CHECK(table.fresh(100000, p).size() == 2);
  CHECK(table.fresh(horizon + 1, p).size() == 1);  // node 1 went stale
  table.expire(horizon + 1, p);
  CHECK(table.size() == 1);
}

TEST_CASE("direct hearing pins a record to one hop") {
  const ProtocolParams p = default_params();
  NeighborTable table;
  table.hear(1, 500.0, 0, 2);
  CHECK(table.fresh(0, p).front().hop_distance == 2);
  table.hear(1, 600.0, 10, 1);
  CHECK(table.fresh(10, p).front().hop_distance == 1);
  table.hear(1, 700.0, 20, 2);  // forwarded copy arrives later
  CHECK(table.fresh(20, p).front().hop_distance == 1);
  CHECK(table.fresh(20, p).front().wra == doctest::Approx(700.0));
}

TEST_CASE("state refresh fires on transmission opportunity or period lapse") {
  const ProtocolParams p = default_params();
  WraState state;
  std::vector<QueuedPacket> queue{pkt(1500, 0)};
  std::vector<NeighborRecord> none;

  state.refresh(queue, none, 0, p, false);  // first call always computes
  CHECK(state.own_wra == doctest::Approx(600.0));

  queue.push_back(pkt(1500, 1));
  state.refresh(queue, none, 10, p, false);  // inside the period, no trigger
  CHECK(state.own_wra == doctest::Approx(600.0));

  state.refresh(queue, none, 20, p, true);  // transmission opportunity
  CHECK(state.own_wra == doctest::Approx(2100.0));

  queue.push_back(pkt(1500, 1));
  state.refresh(queue, none, 20 + p.wra_update_period_us, p, false);  // period lapse
  CHECK(state.own_wra == doctest::Approx(3600.0));
}
