#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "crmsim/reservation.hpp"
#include "crmsim/rng.hpp"

using namespace crmsim;

namespace {

NeighborRecord rec(NodeId id, double wra) {
  NeighborRecord r;
  r.node = id;
  r.wra = wra;
  return r;
}

// Step-by-step oracle for the basic offset, kept textually independent of
// the implementation.
double basic_offset_oracle(double own, const std::vector<double>& neighbor_wras,
                           const ProtocolParams& p, double t_access) {
  std::vector<double> members{own};
  members.insert(members.end(), neighbor_wras.begin(), neighbor_wras.end());
  double sum = 0.0;
  for (double w : members) {
    if (w <= 0.0) continue;
    const double bytes = w / p.mean_weight;
    const double air_us = bytes * 8.0 / p.v_phy_bits_per_us + t_access;
    sum += std::min(static_cast<double>(p.d_max_us), air_us);
  }
  return sum / p.th_res;
}

ProtocolParams example_params() {
  ProtocolParams p = default_params();
  p.t_access_us = 500;
  p.th_res = 0.8;
  p.th_low = 0.5;
  p.th_high = 2.0;
  return p;
}

FrameTiming example_timing() {
  FrameTiming t;
  t.t_rts_us = 50;
  t.t_cts_us = 50;
  t.t_ack_us = 50;
  t.t_data_us = 500;
  t.sifs_us = 64;
  return t;
}

bool entry_overlaps_any(const std::vector<ReservationEntry>& entries, SimTime s, SimTime e) {
  for (const ReservationEntry& en : entries) {
    if (en.start < e && s < en.end) return true;
  }
  return false;
}

// Microsecond-scan oracle: the earliest start at or after `candidate` that
// overlaps nothing and whose gap to the latest earlier entry is exactly
// t_betmin or at least t_frag.
SimTime pan_oracle(const std::vector<ReservationEntry>& entries, SimTime candidate,
                   SimTime duration, SimTime t_betmin, SimTime t_frag) {
  SimTime bound = candidate + t_frag + 1;
  for (const ReservationEntry& e : entries) bound = std::max(bound, e.end + t_frag + 1);
  for (SimTime s = candidate; s <= bound; ++s) {
    if (entry_overlaps_any(entries, s, s + duration)) continue;
    const ReservationEntry* prev = nullptr;
    for (const ReservationEntry& e : entries) {
      if (e.end <= s && (prev == nullptr || e.end > prev->end)) prev = &e;
    }
    if (prev != nullptr) {
      const SimTime gap = s - prev->end;
      if (gap != t_betmin && gap < t_frag) continue;
    }
    return s;
  }
  return bound;  // unreachable for sane inputs
}

}  // namespace

TEST_CASE("basic offset examples") {
  ProtocolParams p = example_params();

  CHECK(basic_offset(0.0, {}, p, 500) == 0);

  SUBCASE("saturated member contributes the capped share") {
    // WRA large enough that bytes/rate + access exceeds d_max.
    std::vector<NeighborRecord> none;
    const double big = 1e9;
    const SimTime got = basic_offset(big, none, p, 500);
    CHECK(got == to_sim_time(p.d_max_us / p.th_res));
    CHECK(got == 6250);
  }

  SUBCASE("worked two-member example") {
    std::vector<NeighborRecord> nb{rec(1, 2700.0)};
    const SimTime got = basic_offset(2700.0, nb, p, 500);
    CHECK(got == 4464);
    const double oracle = basic_offset_oracle(2700.0, {2700.0}, p, 500.0);
    CHECK(oracle == doctest::Approx(31250.0 / 7.0).epsilon(1e-9));
    CHECK(got == to_sim_time(oracle));
  }
}

TEST_CASE("basic offset matches the step-by-step oracle on random inputs") {
  ProtocolParams p = example_params();
  Rng rng(3, 9);
  for (int iter = 0; iter < 1000; ++iter) {
    const double own = rng.uniform(0.0, 200000.0);
    std::vector<NeighborRecord> nbs;
    std::vector<double> wras;
    for (std::size_t i = rng.uniform_inclusive(8); i > 0; --i) {
      const double w = rng.uniform(0.0, 200000.0);
      nbs.push_back(rec(static_cast<NodeId>(i), w));
      wras.push_back(w);
    }
    const double oracle = basic_offset_oracle(own, wras, p, 500.0);
    CHECK(basic_offset(own, nbs, p, 500) == to_sim_time(oracle));
    // Per-member cap: nobody contributes more than d_max / th_res.
    CHECK(oracle <= (wras.size() + 1) * p.d_max_us / p.th_res + 1e-9);
  }
}

TEST_CASE("corrected offset follows the congestion gate and the ratio clamp") {
  ProtocolParams p = example_params();

  CHECK(corrected_offset(4464, 0.3, false, p) == p.t_min_us);
  CHECK(corrected_offset(4464, 7.0, false, p) == p.t_min_us);
  CHECK(corrected_offset(4464, 1.0, true, p) == 4464);
  CHECK(corrected_offset(4464, 3.0, true, p) == 2232);  // clamped to 1/th_low = 2

  SUBCASE("committed ratio stays inside the clamp band") {
    Rng rng(5, 4);
    for (int iter = 0; iter < 500; ++iter) {
      const SimTime t_basic = 1000 + rng.uniform_inclusive(100000);
      const double lambda = rng.uniform(-1.0, 10.0);
      const SimTime off = corrected_offset(t_basic, lambda, true, p);
      const double ratio = static_cast<double>(off) / static_cast<double>(t_basic);
      CHECK(ratio >= p.th_low - 1e-3);
      CHECK(ratio <= p.th_high + 1e-3);
    }
  }

  SUBCASE("non-increasing in lambda over the unclamped range") {
    SimTime prev = corrected_offset(100000, 0.5, true, p);
    for (double lambda = 0.6; lambda <= 2.0; lambda += 0.1) {
      const SimTime cur = corrected_offset(100000, lambda, true, p);
      CHECK(cur <= prev);
      prev = cur;
    }
  }

  SUBCASE("non-positive lambda degrades to the maximum offset") {
    CHECK(corrected_offset(4464, 0.0, true, p) == to_sim_time(4464 * p.th_high));
    CHECK(corrected_offset(4464, -3.0, true, p) == to_sim_time(4464 * p.th_high));
  }

  SUBCASE("lambda clamp mode bounds lambda itself") {
    p.clamp_mode = ClampMode::lambda;
    CHECK(corrected_offset(4464, 3.0, true, p) == to_sim_time(4464 / 2.0));
    CHECK(corrected_offset(4464, 0.1, true, p) == to_sim_time(4464 / 0.5));
  }
}

TEST_CASE("offset smoothing examples and properties") {
  const ProtocolParams p = example_params();

  SUBCASE("empty history passes the raw value through") {
    OffsetHistory h(3);
    CHECK(smooth_offset(h, 2232, p) == 2232);
  }

  SUBCASE("constant history is a fixed point") {
    OffsetHistory h(3);
    for (int i = 0; i < 3; ++i) h.push(2232);
    CHECK(smooth_offset(h, 2232, p) == 2232);
  }

  SUBCASE("worked blend") {
    OffsetHistory h(3);
    for (int i = 0; i < 3; ++i) h.push(2000);
    CHECK(smooth_offset(h, 5000, p) == 3200);
  }

  SUBCASE("warm-up averages over the entries that exist") {
    OffsetHistory h(3);
    h.push(1000);
    // 0.6 * 1000 + 0.4 * 4000 = 2200
    CHECK(smooth_offset(h, 4000, p) == 2200);
  }

  SUBCASE("result bounded by min and max of history plus raw") {
    Rng rng(17, 6);
    for (int iter = 0; iter < 500; ++iter) {
      OffsetHistory h(3);
      SimTime lo = ~0ull, hi = 0;
      for (std::size_t i = rng.uniform_inclusive(3); i > 0; --i) {
        const SimTime v = rng.uniform_inclusive(100000);
        h.push(v);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const SimTime raw = rng.uniform_inclusive(100000);
      lo = std::min(lo, raw);
      hi = std::max(hi, raw);
      const SimTime got = smooth_offset(h, raw, p);
      CHECK(got >= lo);
      CHECK(got <= hi + 1);  // half-up rounding may land on the ceiling
    }
  }

  SUBCASE("ring keeps only the last n values") {
    OffsetHistory h(2);
    h.push(10);
    h.push(20);
    h.push(30);
    CHECK(h.size() == 2);
    // history now {30, 20}: 0.6/2*(50) + 0.4*100 = 55
    const ProtocolParams p2 = [] {
      ProtocolParams q = default_params();
      q.inertia_depth_n = 2;
      return q;
    }();
    CHECK(smooth_offset(h, 100, p2) == 55);
  }
}

TEST_CASE("fragmentation interval examples") {
  FrameTiming t = example_timing();

  SUBCASE("only inter-frame spacing") {
    FrameTiming z;
    z.t_rts_us = z.t_cts_us = z.t_ack_us = z.t_data_us = 0;
    z.sifs_us = 64;
    CHECK(frag_interval(1, z) == 192);
  }

  CHECK(frag_interval(1, t) == 842);

  SUBCASE("linear in the aggregate count") {
    const SimTime m2 = frag_interval(2, t);
    const SimTime m4 = frag_interval(4, t);
    CHECK(m4 - m2 == 2 * t.t_data_us);
  }
}

TEST_CASE("reservation duration caps at the maximum and decomposes as data plus control") {
  const ProtocolParams p = example_params();
  const FrameTiming t = example_timing();

  CHECK(reservation_duration(100'000'000, t, p) == p.d_max_us);
  // 1500 bytes at 24 bits/us -> 500 us of data plus rts+cts+ack+3*sifs.
  CHECK(reservation_duration(1500, t, p) == 500 + 342);
}

TEST_CASE("placement examples") {
  const ProtocolParams p = example_params();
  const FrameTiming t = example_timing();
  const SimTime now = 10'000;

  SUBCASE("empty table places at the requested offset") {
    ReservationTable table;
    const ReservationEntry e = place_reservation(table, now, 2232, 1000, 1, 2, p, t);
    CHECK(e.start == now + 2232);
    CHECK(e.end == now + 3232);
    CHECK(table.size() == 1);
  }

  SUBCASE("short gap snaps to the prior end plus t_betmin") {
    ReservationTable table;
    table.insert({9, 8, now + 1000, now + 3000, EntryOrigin::direct});
    const ReservationEntry e = place_reservation(table, now, 3100, 1000, 1, 2, p, t);
    // candidate start now+3100: gap 100 < 842 -> snap to 3000 + 500
    CHECK(e.start == now + 3500);
    CHECK(table.invariant_holds());
  }

  SUBCASE("overlap pans past the blocking entry") {
    ReservationTable table;
    table.insert({9, 8, now + 2000, now + 4000, EntryOrigin::direct});
    const ReservationEntry e = place_reservation(table, now, 1500, 1000, 1, 2, p, t);
    CHECK(e.start >= now + 4000);
    CHECK(table.invariant_holds());
  }
}

TEST_CASE("placement equals the microsecond-scan oracle") {
  const ProtocolParams p = example_params();
  const FrameTiming timing = example_timing();
  const SimTime t_frag = frag_interval(1, timing);
  Rng rng(23, 8);

  for (int iter = 0; iter < 1000; ++iter) {
    // Random non-overlapping table of up to 10 entries.
    std::vector<ReservationEntry> entries;
    SimTime cursor = rng.uniform_inclusive(500);
    const std::size_t n = rng.uniform_inclusive(10);
    for (std::size_t i = 0; i < n; ++i) {
      cursor += 1 + rng.uniform_inclusive(1500);
      const SimTime dur = 1 + rng.uniform_inclusive(1999);
      entries.push_back({static_cast<NodeId>(100 + i), 0, cursor, cursor + dur,
                         EntryOrigin::direct});
      cursor += dur;
    }
    ReservationTable table;
    for (const ReservationEntry& e : entries) table.insert(e);

    const SimTime candidate_offset = rng.uniform_inclusive(6000);
    const SimTime duration = 1 + rng.uniform_inclusive(p.d_max_us - 1);
    const SimTime want = pan_oracle(entries, candidate_offset, duration, p.t_betmin_us, t_frag);
    const ReservationEntry got =
        place_reservation(table, 0, candidate_offset, duration, 1, 2, p, timing);
    CHECK(got.start == want);
    CHECK(table.invariant_holds());
  }
}

TEST_CASE("table stays sorted and non-overlapping under random operation sequences") {
  const ProtocolParams p = example_params();
  const FrameTiming timing = example_timing();
  Rng rng(31, 12);
  ReservationTable table;
  SimTime now = 0;

  for (int op = 0; op < 10000; ++op) {
    const auto pick = rng.uniform_inclusive(9);
    if (pick < 4) {
      const SimTime offset = rng.uniform_inclusive(5000);
      const SimTime dur = 1 + rng.uniform_inclusive(p.d_max_us - 1);
      place_reservation(table, now, offset, dur, 1, 2, p, timing);
    } else if (pick < 8) {
      ReservationEntry foreign;
      foreign.owner_source = static_cast<NodeId>(2 + rng.uniform_inclusive(5));
      foreign.start = now + rng.uniform_inclusive(20000);
      foreign.end = foreign.start + 1 + rng.uniform_inclusive(4999);
      foreign.learned_from = EntryOrigin::direct;
      table.insert_foreign(foreign);
    } else {
      now += rng.uniform_inclusive(4000);
      table.purge(now);
    }
    REQUIRE(table.invariant_holds());
  }
}

TEST_CASE("foreign inserts cover the heard union and trim around existing entries") {
  ReservationTable table;
  table.insert({1, 2, 100, 200, EntryOrigin::self});
  table.insert({3, 4, 300, 400, EntryOrigin::direct});

  table.insert_foreign({5, 6, 50, 450, EntryOrigin::direct});
  REQUIRE(table.invariant_holds());
  // Every instant of [50, 450) must now be covered.
  for (SimTime t = 50; t < 450; t += 10) CHECK(table.covering(t).has_value());
  // Fully covered announcements add nothing.
  const std::size_t before = table.size();
  table.insert_foreign({7, 8, 110, 190, EntryOrigin::direct});
  CHECK(table.size() == before);
}

TEST_CASE("maintenance purges expired entries and reports the covering entry") {
  ReservationTable table;
  table.insert({1, 2, 100, 200, EntryOrigin::direct});
  table.insert({3, 4, 300, 400, EntryOrigin::direct});

  CHECK(table.covering(150)->owner_source == 1);
  CHECK_FALSE(table.covering(250).has_value());

  table.purge(200);
  CHECK(table.size() == 1);
  CHECK(table.covering(150) == std::nullopt);
  CHECK(table.covering(350)->owner_source == 3);
}
