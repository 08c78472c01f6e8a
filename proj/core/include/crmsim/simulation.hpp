#pragma once

#include <cstdint>
#include <memory>
#include <queue>
#include <vector>

#include "crmsim/channel.hpp"
#include "crmsim/mac.hpp"
#include "crmsim/metrics.hpp"
#include "crmsim/rng.hpp"
#include "crmsim/topology.hpp"
#include "crmsim/trace.hpp"

namespace crmsim {

struct RunOutput {
  Trace trace;
  MetricsReport report;
};

// One deterministic run: single-threaded event loop over a fixed topology,
// static shortest-hop routes, seeded traffic, one protocol variant.
// Identical (world, variant, params, duration, seed) inputs produce
// byte-identical traces.
class Simulation {
 public:
  Simulation(const ScenarioWorld& world, Variant variant, const ProtocolParams& params,
             SimTime duration_us, std::uint64_t seed);
  ~Simulation();

  Trace run();

  // --- context services used by MacNode ---
  SimTime now() const { return now_; }
  const ProtocolParams& params() const { return params_; }
  const FrameTiming& timing() const { return timing_; }
  SimTime t_access() const { return t_access_us_; }
  SimTime difs() const { return params_.sifs_us + 2 * params_.slot_us; }
  SimTime pifs() const { return params_.sifs_us + params_.slot_us; }
  SimTime eifs() const { return params_.sifs_us + params_.t_ack_us + difs(); }
  Rng& mac_rng() { return mac_rng_; }
  Trace& trace() { return trace_; }
  RunCounters& counters() { return trace_.counters(); }
  NodeId route_next_hop(NodeId from, NodeId dest) const;

  void schedule_slot_tick(NodeId node, SimTime t, std::uint64_t token);
  void schedule_send(NodeId node, SimTime t, MacFrame frame, std::uint64_t token);
  void schedule_initiate(NodeId node, SimTime t, bool chained = false);
  void schedule_cts_timeout(NodeId node, SimTime t, std::uint64_t token);
  void schedule_ack_timeout(NodeId node, SimTime t, std::uint64_t token);
  void schedule_reservation_events(NodeId node, const ReservationEntry& entry);
  void schedule_silence_check(NodeId node, SimTime t);
  void schedule_wake(NodeId node, SimTime t);

  // Starts a frame on the air; handles carrier notifications, listener
  // eligibility, the silencing-soundness check and energy bookkeeping.
  void transmit(NodeId sender, MacFrame frame);

  int channel_active_in_range(NodeId node) const { return channel_.active_count_in_range(node); }
  void channel_drop_listener(NodeId node) { channel_.drop_listener(node); }

  // Packet custody: conservation accounting happens here.
  void packet_created(const QueuedPacket& pkt, std::uint32_t flow_idx);
  void packet_accepted(NodeId receiver, const QueuedPacket& pkt, SimTime now);
  void packet_dropped_buffer(NodeId at, const QueuedPacket& pkt, SimTime now);
  void packet_dropped_retry(NodeId at, const QueuedPacket& pkt, SimTime now);
  bool holds_custody(NodeId node, const QueuedPacket& pkt) const;

  // Saturated sources refill when their queue drains below half capacity.
  void notify_dequeue(NodeId node, SimTime now);

 private:
  enum class EvKind : std::uint8_t {
    slot_tick,
    scheduled_send,
    initiate,
    cts_timeout,
    ack_timeout,
    tx_end,
    reservation_start,
    reservation_end,
    silence_check,
    wake,
    wra_period,
    traffic_arrival,
  };

  struct Event {
    SimTime t = 0;
    std::uint64_t seq = 0;
    EvKind kind = EvKind::slot_tick;
    NodeId node = kNoNode;
    std::uint64_t token = 0;
    std::uint64_t id = 0;  // tx id or flow index
    MacFrame frame;
    ReservationEntry entry;
  };
  struct EventLater {
    bool operator()(const Event& a, const Event& b) const {
      if (a.t != b.t) return a.t > b.t;
      return a.seq > b.seq;
    }
  };

  void push_event(Event ev);
  void dispatch(const Event& ev);
  void seed_traffic();
  void fill_source_to_capacity(NodeId node, SimTime now);
  QueuedPacket make_packet(std::uint32_t flow_idx, SimTime now);
  void schedule_next_arrival(std::uint32_t flow_idx, SimTime now);
  void finalize();

  enum class PacketState : std::uint8_t { in_network, delivered, dropped };

  const ScenarioWorld& world_;
  Variant variant_;
  ProtocolParams params_;
  FrameTiming timing_;
  SimTime t_access_us_ = 0;
  SimTime duration_us_ = 0;

  RouteTable routes_;
  Channel channel_;
  std::vector<std::unique_ptr<MacNode>> nodes_;

  std::priority_queue<Event, std::vector<Event>, EventLater> events_;
  std::uint64_t next_seq_ = 0;
  SimTime now_ = 0;

  Rng mac_rng_;
  Rng traffic_rng_;
  Trace trace_;

  // Custody ledger, indexed by packet id (sequential from 0).
  std::vector<PacketState> pkt_state_;
  std::vector<NodeId> pkt_holder_;
  std::vector<std::uint32_t> pkt_flow_;

  std::vector<std::vector<std::uint32_t>> flows_of_source_;
  std::vector<std::uint32_t> source_fill_cursor_;
};

// Convenience wrapper: run one simulation and collect its report.
RunOutput run_simulation(const ScenarioWorld& world, Variant variant,
                         const ProtocolParams& params, SimTime duration_us, std::uint64_t seed);

}  // namespace crmsim
