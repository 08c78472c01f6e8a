#pragma once

#include <map>
#include <span>
#include <vector>

#include "crmsim/packet.hpp"
#include "crmsim/params.hpp"

namespace crmsim {

// Reservation-ability weight: weighted queue bytes. Zero iff the queue is
// empty (weights are strictly positive).
using WraBytes = double;

// What a node knows about one contention-set member, learned from overheard
// reservation instructions. hop_distance is 1 when the instruction was heard
// directly and 2 when it arrived forwarded inside an ACK.
struct NeighborRecord {
  NodeId node = kNoNode;
  WraBytes wra = 0.0;
  SimTime last_heard = 0;
  int hop_distance = 1;
};

// Weighted byte sum of the queue: local packets (never forwarded) count at
// weight_local, relayed packets at weight_relay.
WraBytes compute_wra(std::span<const QueuedPacket> queue, const ProtocolParams& p);

enum class LambdaStatus {
  ok,
  empty_contention_set,  // no records: node is uncontended, caller uses t_min
  zero_neighbor_load,    // mean neighbor weight is 0: caller clamps lambda high
};

struct LambdaResult {
  LambdaStatus status = LambdaStatus::ok;
  double value = 0.0;
};

// Own weight divided by the arithmetic mean of the recorded neighbor
// weights (both hop distances).
LambdaResult compute_lambda(WraBytes own_wra, std::span<const NeighborRecord> neighbors);

// Weight value at which a queue counts as congested: mean weight factor x
// buffer threshold x buffer capacity in bytes.
WraBytes congestion_wra_threshold(const ProtocolParams& p);

// True iff the largest recorded neighbor weight reaches the threshold.
// Callers that must count their own queue append it before calling.
bool is_any_neighbor_congested(std::span<const NeighborRecord> neighbors, WraBytes threshold);

// Per-node record table keyed by neighbor id. Records not refreshed within
// the staleness horizon are dropped before use.
class NeighborTable {
 public:
  static constexpr int kStalenessPeriods = 4;

  void hear(NodeId node, WraBytes wra, SimTime now, int hop_distance);
  void expire(SimTime now, const ProtocolParams& p);

  std::vector<NeighborRecord> fresh(SimTime now, const ProtocolParams& p) const;
  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }

 private:
  static SimTime horizon(const ProtocolParams& p) {
    return static_cast<SimTime>(kStalenessPeriods) * p.wra_update_period_us;
  }
  std::map<NodeId, NeighborRecord> records_;
};

// Cached per-node view of the updating phase: own weight and correction
// factor, recomputed when a transmission opportunity arrives or the update
// period lapses.
struct WraState {
  WraBytes own_wra = 0.0;
  LambdaResult lambda;
  SimTime last_update = 0;
  bool ever_updated = false;

  bool refresh_due(SimTime now, const ProtocolParams& p) const {
    return !ever_updated || now - last_update >= p.wra_update_period_us;
  }

  // Recomputes when forced (transmission opportunity) or when the period
  // lapsed; otherwise leaves the cached values alone.
  void refresh(std::span<const QueuedPacket> queue, std::span<const NeighborRecord> neighbors,
               SimTime now, const ProtocolParams& p, bool transmission_opportunity);
};

}  // namespace crmsim
