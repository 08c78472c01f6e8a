#include "crmsim/simulation.hpp"

#include <algorithm>
#include <cassert>

namespace crmsim {

Simulation::Simulation(const ScenarioWorld& world, Variant variant, const ProtocolParams& params,
                       SimTime duration_us, std::uint64_t seed)
    : world_(world),
      variant_(variant),
      params_(params),
      timing_(frame_timing_from(params)),
      duration_us_(duration_us),
      routes_(RouteTable::build(world.topology)),
      channel_(&world.topology),
      mac_rng_(seed, 0x6D61636Dull),
      traffic_rng_(seed, 0x74726166ull) {
  t_access_us_ = effective_t_access(params_, timing_);
  const std::size_t n = world.topology.node_count();
  nodes_.reserve(n);
  for (NodeId i = 0; i < n; ++i) nodes_.push_back(std::make_unique<MacNode>(this, i, variant));

  flows_of_source_.assign(n, {});
  for (std::uint32_t f = 0; f < world.traffic.flows.size(); ++f)
    flows_of_source_[world.traffic.flows[f].source].push_back(f);
  source_fill_cursor_.assign(n, 0);
}

Simulation::~Simulation() = default;

NodeId Simulation::route_next_hop(NodeId from, NodeId dest) const {
  return routes_.next_hop(from, dest);
}

void Simulation::push_event(Event ev) {
  ev.seq = next_seq_++;
  events_.push(std::move(ev));
}

void Simulation::schedule_slot_tick(NodeId node, SimTime t, std::uint64_t token) {
  Event ev;
  ev.t = t;
  ev.kind = EvKind::slot_tick;
  ev.node = node;
  ev.token = token;
  push_event(std::move(ev));
}

void Simulation::schedule_send(NodeId node, SimTime t, MacFrame frame, std::uint64_t token) {
  Event ev;
  ev.t = t;
  ev.kind = EvKind::scheduled_send;
  ev.node = node;
  ev.token = token;
  ev.frame = std::move(frame);
  push_event(std::move(ev));
}

void Simulation::schedule_initiate(NodeId node, SimTime t, bool chained) {
  Event ev;
  ev.t = t;
  ev.kind = EvKind::initiate;
  ev.node = node;
  ev.token = chained ? 1 : 0;
  push_event(std::move(ev));
}

void Simulation::schedule_cts_timeout(NodeId node, SimTime t, std::uint64_t token) {
  Event ev;
  ev.t = t;
  ev.kind = EvKind::cts_timeout;
  ev.node = node;
  ev.token = token;
  push_event(std::move(ev));
}

void Simulation::schedule_ack_timeout(NodeId node, SimTime t, std::uint64_t token) {
  Event ev;
  ev.t = t;
  ev.kind = EvKind::ack_timeout;
  ev.node = node;
  ev.token = token;
  push_event(std::move(ev));
}

void Simulation::schedule_reservation_events(NodeId node, const ReservationEntry& entry) {
  Event start;
  start.t = entry.start;
  start.kind = EvKind::reservation_start;
  start.node = node;
  start.entry = entry;
  push_event(std::move(start));
  Event end;
  end.t = entry.end;
  end.kind = EvKind::reservation_end;
  end.node = node;
  end.entry = entry;
  push_event(std::move(end));
}

void Simulation::schedule_silence_check(NodeId node, SimTime t) {
  Event ev;
  ev.t = t;
  ev.kind = EvKind::silence_check;
  ev.node = node;
  push_event(std::move(ev));
}

void Simulation::schedule_wake(NodeId node, SimTime t) {
  Event ev;
  ev.t = t;
  ev.kind = EvKind::wake;
  ev.node = node;
  push_event(std::move(ev));
}

void Simulation::transmit(NodeId sender, MacFrame frame) {
  MacNode& node = *nodes_[sender];
  assert(frame.air_time_us > 0);
  const SimTime end = now_ + frame.air_time_us;

  // Silencing soundness: a transmission must never overlap a reservation
  // the exchange endpoints are not a party to.
  if (node.table_.first_nonparty_overlap(now_, end, sender, frame.receiver)) {
    ++counters().soundness_violations;
    assert(false && "transmission overlaps a reservation it is no party to");
  }
  if (node.own_active_entry_ && node.own_active_entry_->covers(now_))
    counters().reserved_used_us += frame.air_time_us;
  if (frame.kind == FrameKind::data_ampdu || frame.kind == FrameKind::ack) {
    if (frame.rsi) {
      ++counters().rsi_mpdus;
      counters().rsi_bytes += kRsiWireBytes;
    }
  }

  trace_.push({now_, TraceKind::tx_start, sender, frame.receiver,
               static_cast<int>(frame.kind), frame.air_time_us,
               static_cast<std::uint64_t>(frame.mpdus.size()), frame.nav_until_end_us, 0.0});

  node.radio_transition(now_, RadioState::tx);
  channel_.drop_listener(sender);

  std::vector<NodeId> listeners;
  for (NodeId nb : world_.topology.adjacency[sender]) {
    MacNode& m = *nodes_[nb];
    if (m.sleeping()) continue;
    m.on_carrier_busy(now_);
    if (m.radio() != RadioState::tx) listeners.push_back(nb);
  }
  const std::uint64_t tx_id = channel_.begin_tx(sender, std::move(frame), end, listeners);

  Event ev;
  ev.t = end;
  ev.kind = EvKind::tx_end;
  ev.node = sender;
  ev.id = tx_id;
  push_event(std::move(ev));
}

void Simulation::packet_created(const QueuedPacket& pkt, std::uint32_t flow_idx) {
  assert(pkt.id == pkt_state_.size());
  pkt_state_.push_back(PacketState::in_network);
  pkt_holder_.push_back(pkt.source);
  pkt_flow_.push_back(flow_idx);
  ++counters().generated;
}

void Simulation::packet_accepted(NodeId receiver, const QueuedPacket& pkt, SimTime now) {
  pkt_holder_[pkt.id] = receiver;
  if (pkt.final_destination == receiver) {
    pkt_state_[pkt.id] = PacketState::delivered;
    ++counters().delivered;
    trace_.push({now, TraceKind::deliver_final, receiver, pkt.source, -1, pkt.id,
                 now - pkt.created_at, pkt.length_bytes, 0.0});
    return;
  }
  QueuedPacket forwarded = pkt;
  ++forwarded.hop_count;
  nodes_[receiver]->enqueue(forwarded, now);
}

void Simulation::packet_dropped_buffer(NodeId at, const QueuedPacket& pkt, SimTime now) {
  pkt_state_[pkt.id] = PacketState::dropped;
  pkt_holder_[pkt.id] = at;
  ++counters().drops_buffer;
  trace_.push({now, TraceKind::drop_buffer, at, kNoNode, -1, pkt.id, 0, 0, 0.0});
}

void Simulation::packet_dropped_retry(NodeId at, const QueuedPacket& pkt, SimTime now) {
  // Only counts while this node still holds custody; a receiver that
  // accepted the data despite the lost ACK owns the packet now and the
  // sender's copy is a ghost.
  if (pkt_holder_[pkt.id] != at || pkt_state_[pkt.id] != PacketState::in_network) return;
  pkt_state_[pkt.id] = PacketState::dropped;
  ++counters().drops_retry;
  trace_.push({now, TraceKind::drop_retry, at, kNoNode, -1, pkt.id, 0, 0, 0.0});
}

bool Simulation::holds_custody(NodeId node, const QueuedPacket& pkt) const {
  return pkt_holder_[pkt.id] == node && pkt_state_[pkt.id] == PacketState::in_network;
}

QueuedPacket Simulation::make_packet(std::uint32_t flow_idx, SimTime now) {
  const Flow& flow = world_.traffic.flows[flow_idx];
  QueuedPacket pkt;
  pkt.id = pkt_state_.size();
  pkt.source = flow.source;
  pkt.final_destination = flow.destination;
  pkt.length_bytes = world_.traffic.packet_bytes;
  pkt.hop_count = 0;
  pkt.created_at = now;
  pkt.is_realtime = world_.traffic.realtime_fraction >= 1.0
                        ? true
                        : traffic_rng_.uniform_unit() < world_.traffic.realtime_fraction;
  packet_created(pkt, flow_idx);
  return pkt;
}

void Simulation::fill_source_to_capacity(NodeId node, SimTime now) {
  const auto& flows = flows_of_source_[node];
  if (flows.empty()) return;
  while (nodes_[node]->queue_length() < params_.buffer_capacity_packets) {
    const std::uint32_t flow = flows[source_fill_cursor_[node] % flows.size()];
    ++source_fill_cursor_[node];
    nodes_[node]->enqueue(make_packet(flow, now), now);
  }
}

void Simulation::notify_dequeue(NodeId node, SimTime now) {
  if (world_.traffic.mode != TrafficMode::saturated) return;
  if (flows_of_source_[node].empty()) return;
  if (nodes_[node]->queue_length() < params_.buffer_capacity_packets / 2)
    fill_source_to_capacity(node, now);
}

void Simulation::schedule_next_arrival(std::uint32_t flow_idx, SimTime now) {
  const double rate = world_.traffic.offered_rate_bits_per_s;
  if (rate <= 0.0) return;
  const double mean_gap_us =
      static_cast<double>(world_.traffic.packet_bytes) * 8.0 / rate * 1e6;
  const SimTime gap = std::max<SimTime>(1, to_sim_time(traffic_rng_.exponential(mean_gap_us)));
  Event ev;
  ev.t = now + gap;
  ev.kind = EvKind::traffic_arrival;
  ev.id = flow_idx;
  push_event(std::move(ev));
}

void Simulation::seed_traffic() {
  if (world_.traffic.mode == TrafficMode::saturated) {
    for (NodeId n = 0; n < nodes_.size(); ++n) fill_source_to_capacity(n, 0);
  } else {
    for (std::uint32_t f = 0; f < world_.traffic.flows.size(); ++f) schedule_next_arrival(f, 0);
  }
  if (variant_ == Variant::ftkn_crm) {
    for (NodeId n = 0; n < nodes_.size(); ++n) {
      Event ev;
      ev.t = params_.wra_update_period_us;
      ev.kind = EvKind::wra_period;
      ev.node = n;
      push_event(std::move(ev));
    }
  }
}

void Simulation::dispatch(const Event& ev) {
  MacNode* node = ev.node != kNoNode ? nodes_[ev.node].get() : nullptr;
  switch (ev.kind) {
    case EvKind::slot_tick:
      node->on_slot_tick(ev.t, ev.token);
      break;
    case EvKind::scheduled_send:
      node->on_scheduled_send(ev.frame, ev.t, ev.token);
      break;
    case EvKind::initiate:
      node->on_initiate(ev.t, ev.token != 0);
      break;
    case EvKind::cts_timeout:
      node->on_cts_timeout(ev.t, ev.token);
      break;
    case EvKind::ack_timeout:
      node->on_ack_timeout(ev.t, ev.token);
      break;
    case EvKind::tx_end: {
      Channel::EndResult result = channel_.end_tx(ev.id);
      nodes_[ev.node]->tx_finished(ev.t);
      trace_.push({ev.t, TraceKind::tx_end, ev.node, result.frame.receiver,
                   static_cast<int>(result.frame.kind), 0, 0, 0, 0.0});
      for (NodeId nb : world_.topology.adjacency[ev.node]) {
        if (!nodes_[nb]->sleeping()) nodes_[nb]->on_carrier_idle(ev.t);
      }
      for (const Channel::Outcome& o : result.outcomes) {
        if (o.collided) {
          ++counters().collisions;
          trace_.push({ev.t, TraceKind::rx_collision, o.receiver, ev.node,
                       static_cast<int>(result.frame.kind), 0, 0, 0, 0.0});
          nodes_[o.receiver]->on_collision_observed(ev.t);
        } else {
          if (result.frame.receiver == o.receiver) {
            trace_.push({ev.t, TraceKind::rx_ok, o.receiver, ev.node,
                         static_cast<int>(result.frame.kind), 0, 0, 0, 0.0});
          }
          nodes_[o.receiver]->on_frame_received(result.frame, ev.t);
        }
      }
      break;
    }
    case EvKind::reservation_start:
      node->on_reservation_start(ev.t, ev.entry);
      break;
    case EvKind::reservation_end:
      node->on_reservation_end(ev.t, ev.entry);
      break;
    case EvKind::silence_check:
      node->on_silence_check(ev.t);
      break;
    case EvKind::wake:
      node->on_wake(ev.t);
      break;
    case EvKind::wra_period: {
      node->on_wra_period(ev.t);
      Event next;
      next.t = ev.t + params_.wra_update_period_us;
      next.kind = EvKind::wra_period;
      next.node = ev.node;
      push_event(std::move(next));
      break;
    }
    case EvKind::traffic_arrival: {
      const std::uint32_t flow = static_cast<std::uint32_t>(ev.id);
      nodes_[world_.traffic.flows[flow].source]->enqueue(make_packet(flow, ev.t), ev.t);
      schedule_next_arrival(flow, ev.t);
      break;
    }
  }
}

void Simulation::finalize() {
  trace_.set_duration_us(duration_us_);
  trace_.energy().clear();
  for (auto& node : nodes_) {
    node->finalize(duration_us_);
    trace_.energy().push_back(node->energy());
  }
  auto& residual = trace_.residual_packets();
  residual.assign(nodes_.size(), 0);
  for (std::size_t id = 0; id < pkt_state_.size(); ++id) {
    if (pkt_state_[id] == PacketState::in_network) ++residual[pkt_holder_[id]];
  }
}

Trace Simulation::run() {
  seed_traffic();
  while (!events_.empty()) {
    const Event& top = events_.top();
    if (top.t > duration_us_) break;
    Event ev = top;
    events_.pop();
    now_ = ev.t;
    dispatch(ev);
  }
  now_ = duration_us_;
  finalize();
  return std::move(trace_);
}

RunOutput run_simulation(const ScenarioWorld& world, Variant variant,
                         const ProtocolParams& params, SimTime duration_us, std::uint64_t seed) {
  Simulation sim(world, variant, params, duration_us, seed);
  RunOutput out;
  out.trace = sim.run();
  out.report = collect(out.trace, params);
  return out;
}

}  // namespace crmsim
