#include "crmsim/wra.hpp"

#include <algorithm>

namespace crmsim {

WraBytes compute_wra(std::span<const QueuedPacket> queue, const ProtocolParams& p) {
  WraBytes total = 0.0;
  for (const QueuedPacket& pkt : queue) {
    const double alpha = pkt.hop_count == 0 ? p.weight_local : p.weight_relay;
    total += alpha * static_cast<double>(pkt.length_bytes);
  }
  return total;
}

LambdaResult compute_lambda(WraBytes own_wra, std::span<const NeighborRecord> neighbors) {
  if (neighbors.empty()) return {LambdaStatus::empty_contention_set, 0.0};
  double sum = 0.0;
  for (const NeighborRecord& n : neighbors) sum += n.wra;
  const double mean = sum / static_cast<double>(neighbors.size());
  if (mean <= 0.0) return {LambdaStatus::zero_neighbor_load, 0.0};
  return {LambdaStatus::ok, own_wra / mean};
}

WraBytes congestion_wra_threshold(const ProtocolParams& p) {
  const double buffer_bytes =
      static_cast<double>(p.buffer_capacity_packets) * static_cast<double>(p.mean_packet_bytes);
  return p.mean_weight * p.th_buffer * buffer_bytes;
}

bool is_any_neighbor_congested(std::span<const NeighborRecord> neighbors, WraBytes threshold) {
  for (const NeighborRecord& n : neighbors) {
    if (n.wra >= threshold) return true;
  }
  return false;
}

void NeighborTable::hear(NodeId node, WraBytes wra, SimTime now, int hop_distance) {
  auto it = records_.find(node);
  if (it == records_.end()) {
    records_[node] = NeighborRecord{node, wra, now, hop_distance};
    return;
  }
  NeighborRecord& rec = it->second;
  // A direct hearing pins the node as a first-hop neighbor; topologies are
  // static, so a forwarded copy never demotes it back to two hops.
  rec.hop_distance = std::min(rec.hop_distance, hop_distance);
  rec.wra = wra;
  rec.last_heard = now;
}

void NeighborTable::expire(SimTime now, const ProtocolParams& p) {
  const SimTime h = horizon(p);
  for (auto it = records_.begin(); it != records_.end();) {
    if (now > it->second.last_heard && now - it->second.last_heard > h)
      it = records_.erase(it);
    else
      ++it;
  }
}

std::vector<NeighborRecord> NeighborTable::fresh(SimTime now, const ProtocolParams& p) const {
  const SimTime h = horizon(p);
  std::vector<NeighborRecord> out;
  out.reserve(records_.size());
  for (const auto& [id, rec] : records_) {
    if (now <= rec.last_heard || now - rec.last_heard <= h) out.push_back(rec);
  }
  return out;
}

void WraState::refresh(std::span<const QueuedPacket> queue,
                       std::span<const NeighborRecord> neighbors, SimTime now,
                       const ProtocolParams& p, bool transmission_opportunity) {
  if (!transmission_opportunity && !refresh_due(now, p)) return;
  own_wra = compute_wra(queue, p);
  lambda = compute_lambda(own_wra, neighbors);
  last_update = now;
  ever_updated = true;
}

}  // namespace crmsim
