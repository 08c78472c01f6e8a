#include "crmsim/mac.hpp"

#include <algorithm>
#include <cassert>
#include <map>

#include "crmsim/simulation.hpp"

namespace crmsim {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::baseline_csma: return "baseline_csma";
    case Variant::fixed_reservation: return "fixed_reservation";
    case Variant::ftkn_crm: return "ftkn_crm";
  }
  return "?";
}

std::optional<Variant> variant_from_name(const std::string& name) {
  if (name == "baseline_csma") return Variant::baseline_csma;
  if (name == "fixed_reservation") return Variant::fixed_reservation;
  if (name == "ftkn_crm") return Variant::ftkn_crm;
  return std::nullopt;
}

CwBounds cw_bounds(CwClass c, const ProtocolParams& p) {
  switch (c) {
    case CwClass::low: return {p.cw_low, p.cw_general};
    case CwClass::general: return {p.cw_general, p.cw_high};
    case CwClass::high: return {p.cw_high, 2 * p.cw_high + 1};
  }
  return {p.cw_general, p.cw_high};
}

CwClass select_cw_class(double lambda, bool pending_reservation_links_all_served,
                        const ProtocolParams& p) {
  if (lambda > p.th_less) return CwClass::low;
  if (pending_reservation_links_all_served) return CwClass::high;
  return CwClass::general;
}

MacNode::MacNode(Simulation* sim, NodeId id, Variant variant)
    : sim_(sim), id_(id), variant_(variant) {
  history_.set_depth(sim_->params().inertia_depth_n);
  bounds_ = cw_bounds(CwClass::general, sim_->params());
  current_cw_ = bounds_.min_cw;
}

SimTime MacNode::control_overhead() const {
  const FrameTiming& t = sim_->timing();
  return t.t_rts_us + t.t_cts_us + t.t_ack_us + 3 * t.sifs_us;
}

SimTime MacNode::exchange_air(SimTime data_air) const {
  return control_overhead() + data_air;
}

NodeId MacNode::next_hop_of(const QueuedPacket& pkt) const {
  return sim_->route_next_hop(id_, pkt.final_destination);
}

std::uint64_t MacNode::realtime_backlog_bytes() const {
  std::uint64_t bytes = 0;
  for (const QueuedPacket& p : queue_) {
    if (p.is_realtime) bytes += p.length_bytes;
  }
  return bytes;
}

// ---------------------------------------------------------------------------
// Queueing and traffic.

void MacNode::enqueue(QueuedPacket pkt, SimTime now) {
  const ProtocolParams& p = sim_->params();
  if (queue_.size() >= p.buffer_capacity_packets) {
    sim_->packet_dropped_buffer(id_, pkt, now);
    return;
  }
  queue_.push_back(pkt);
  if (phase_ == MacPhase::idle) {
    if (own_active_entry_ && own_active_entry_->covers(now)) {
      sim_->schedule_initiate(id_, now + sim_->params().sifs_us);
    } else {
      enter_backoff(now, true);
    }
  }
}

// ---------------------------------------------------------------------------
// Contention.

void MacNode::enter_backoff(SimTime now, bool fresh_window) {
  assert(phase_ == MacPhase::idle || phase_ == MacPhase::backoff ||
         phase_ == MacPhase::awaiting_cts || phase_ == MacPhase::awaiting_ack);
  const ProtocolParams& p = sim_->params();
  // The class is re-selected at every backoff entry; the grown window
  // survives retries only while the class stays put.
  CwClass cls;
  double eff_lambda = 0.0;
  if (variant_ == Variant::ftkn_crm) {
    neighbors_.expire(now, p);
    const auto fresh = neighbors_.fresh(now, p);
    wra_.refresh(queue_, fresh, now, p, false);
    eff_lambda = wra_.lambda.value;
    if (wra_.lambda.status == LambdaStatus::zero_neighbor_load) eff_lambda = p.th_high;
    cls = select_cw_class(eff_lambda, all_reservation_links_served(now), p);
  } else {
    // Non-adaptive variants use the real-time bounds for real-time
    // traffic and the general rung otherwise.
    const bool rt = !queue_.empty() ? queue_.front().is_realtime
                                    : (!batch_.empty() && batch_.front().is_realtime);
    cls = rt ? CwClass::low : CwClass::general;
  }
  if (fresh_window || cls != cw_class_) {
    cw_class_ = cls;
    bounds_ = cw_bounds(cls, p);
    current_cw_ = bounds_.min_cw;
  }
  phase_ = MacPhase::backoff;
  backoff_counter_ = static_cast<std::uint32_t>(sim_->mac_rng().uniform_inclusive(current_cw_));
  ++tick_token_;
  const SimTime tick = (now / p.slot_us + 1) * p.slot_us;
  sim_->schedule_slot_tick(id_, tick, tick_token_);
  sim_->trace().push({now, TraceKind::backoff_enter, id_, kNoNode, -1, backoff_counter_,
                      static_cast<std::uint64_t>(cw_class_), current_cw_, eff_lambda});
}

bool MacNode::can_count_down(SimTime tick) const {
  // The decision for the slot ending at `tick` uses channel state strictly
  // before it; energy arriving exactly at the boundary does not block the
  // decision (that is what makes same-slot collisions possible).
  if (carrier_count_ > 0 && carrier_busy_start_ < tick) return false;
  const SimTime slot = sim_->params().slot_us;
  const SimTime free_since = std::max({carrier_last_end_, nav_until_, eifs_until_});
  return tick >= free_since + sim_->difs() + slot;
}

void MacNode::on_slot_tick(SimTime now, std::uint64_t token) {
  if (token != tick_token_ || phase_ != MacPhase::backoff) return;
  if (can_count_down(now)) {
    if (backoff_counter_ > 0) --backoff_counter_;
    if (backoff_counter_ == 0 && try_initiate(now)) return;
  }
  sim_->schedule_slot_tick(id_, now + sim_->params().slot_us, token);
}

void MacNode::gather_batch(SimTime now, NodeId preferred_dest, SimTime data_air_budget) {
  NodeId dest = preferred_dest;
  if (dest != kNoNode) {
    const bool any = std::any_of(queue_.begin(), queue_.end(), [&](const QueuedPacket& pkt) {
      return next_hop_of(pkt) == dest;
    });
    if (!any) dest = kNoNode;
  }
  if (dest == kNoNode && !queue_.empty()) dest = next_hop_of(queue_.front());
  gather_batch_for(now, dest, data_air_budget);
}

void MacNode::gather_batch_for(SimTime now, NodeId dest, SimTime data_air_budget) {
  batch_.clear();
  batch_dest_ = kNoNode;
  const ProtocolParams& p = sim_->params();
  if (dest == kNoNode) return;

  const bool reserve_rsi_space = variant_ != Variant::baseline_csma;
  std::vector<std::size_t> taken;
  std::vector<QueuedPacket> candidate;
  for (std::size_t i = 0; i < queue_.size(); ++i) {
    const QueuedPacket& pkt = queue_[i];
    if (next_hop_of(pkt) != dest) continue;
    candidate.push_back(pkt);
    if (ampdu_air_time(candidate, reserve_rsi_space, p) > data_air_budget) {
      candidate.pop_back();
      break;
    }
    taken.push_back(i);
  }
  if (taken.empty()) return;

  batch_ = std::move(candidate);
  batch_dest_ = dest;
  // Remove taken indices back to front.
  for (auto it = taken.rbegin(); it != taken.rend(); ++it)
    queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(*it));
  sim_->notify_dequeue(id_, now);
}

bool MacNode::try_initiate(SimTime now, bool chained) {
  if (phase_ == MacPhase::sleeping || radio_ == RadioState::tx) return false;
  if (queue_.empty() && batch_.empty()) {
    if (phase_ == MacPhase::backoff) {
      phase_ = MacPhase::idle;
      ++tick_token_;
    }
    return false;
  }
  const ProtocolParams& p = sim_->params();
  table_.purge(now);

  const bool in_own_slot = own_active_entry_ && own_active_entry_->covers(now);
  SimTime hard_end;
  if (in_own_slot) {
    // Cold entry into reserved time waits for the medium to settle one
    // PIFS; a chained exchange continues the floor it already holds.
    if (carrier_count_ > 0) return false;
    if (!chained && now < carrier_last_end_ + sim_->pifs()) return false;
    hard_end = own_active_entry_->end;
  } else {
    hard_end = now + std::max(p.txop_limit_us, control_overhead() + 1);
    if (auto cov = table_.covering(now); cov && cov->owner_source != id_) return false;
  }
  // The whole exchange must clear every foreign reservation we know about.
  for (const ReservationEntry& e : table_.entries()) {
    if (e.owner_source == id_) continue;
    if (e.end <= now) continue;
    if (e.start >= hard_end) break;
    hard_end = std::min(hard_end, e.start);
  }
  if (hard_end <= now + exchange_air(0)) return false;
  const SimTime data_budget = hard_end - now - exchange_air(0);

  // Inside an own slot only the announced destination is awake; a pending
  // batch for anyone else goes back to the queue rather than burning the
  // slot on a sleeping receiver.
  if (in_own_slot && !batch_.empty() &&
      batch_dest_ != own_active_entry_->link_destination) {
    queue_.insert(queue_.begin(), batch_.begin(), batch_.end());
    batch_.clear();
    batch_dest_ = kNoNode;
    retry_ = 0;
  }

  if (batch_.empty()) {
    if (in_own_slot) {
      gather_batch_for(now, own_active_entry_->link_destination, data_budget);
    } else {
      gather_batch(now, kNoNode, data_budget);
    }
    if (batch_.empty()) return false;
    batch_with_rsi_ = variant_ != Variant::baseline_csma &&
                      (realtime_backlog_bytes() > 0 || pending_own_entry_.has_value());
    batch_data_air_ = ampdu_air_time(batch_, batch_with_rsi_, p);
  } else if (batch_data_air_ > data_budget) {
    // Retrying into a shrinking window: shed trailing packets until the
    // batch fits again.
    while (!batch_.empty() && ampdu_air_time(batch_, batch_with_rsi_, p) > data_budget) {
      queue_.insert(queue_.begin(), batch_.back());
      batch_.pop_back();
    }
    if (batch_.empty()) {
      batch_dest_ = kNoNode;
      retry_ = 0;
      return false;
    }
    batch_data_air_ = ampdu_air_time(batch_, batch_with_rsi_, p);
  }

  send_rts(now);
  return true;
}

void MacNode::send_rts(SimTime now) {
  const FrameTiming& t = sim_->timing();
  ++tick_token_;  // leave backoff
  ++exchange_token_;
  phase_ = MacPhase::awaiting_cts;

  MacFrame rts;
  rts.kind = FrameKind::rts;
  rts.transmitter = id_;
  rts.receiver = batch_dest_;
  rts.air_time_us = t.t_rts_us;
  rts.nav_until_end_us = now + exchange_air(batch_data_air_);
  sim_->transmit(id_, rts);

  const SimTime deadline = now + t.t_rts_us + t.sifs_us + t.t_cts_us + 2 * sim_->params().slot_us;
  sim_->schedule_cts_timeout(id_, deadline, exchange_token_);
}

// ---------------------------------------------------------------------------
// Frame reception.

void MacNode::on_frame_received(const MacFrame& frame, SimTime now) {
  eifs_until_ = 0;  // an error-free reception resynchronizes the station
  switch (frame.kind) {
    case FrameKind::rts:
      if (frame.receiver == id_) {
        handle_rts(frame, now);
      } else {
        nav_until_ = std::max(nav_until_, frame.nav_until_end_us);
      }
      break;
    case FrameKind::cts:
      if (frame.receiver == id_ && phase_ == MacPhase::awaiting_cts) {
        handle_cts(frame, now);
      } else if (frame.receiver != id_) {
        nav_until_ = std::max(nav_until_, frame.nav_until_end_us);
      }
      break;
    case FrameKind::data_ampdu:
      handle_data(frame, now);
      break;
    case FrameKind::ack:
      if (frame.receiver == id_ && phase_ == MacPhase::awaiting_ack) {
        handle_ack(frame, now);
      } else if (frame.rsi && node_from_addr(frame.rsi->owner_source) != id_) {
        hear_rsi(*frame.rsi, now, now, 2);
      }
      break;
  }
}

void MacNode::handle_rts(const MacFrame& frame, SimTime now) {
  if (phase_ != MacPhase::idle && phase_ != MacPhase::backoff) return;
  if (nav_until_ > now) return;
  // Responding commits this node through the whole announced exchange. The
  // window must be clear of every reservation the initiator does not own;
  // the initiator's own reserved time is exactly where it is entitled to
  // run the exchange.
  table_.purge(now);
  for (const ReservationEntry& e : table_.entries()) {
    if (e.start >= frame.nav_until_end_us) break;
    if (e.owner_source != frame.transmitter && e.overlaps(now, frame.nav_until_end_us)) return;
  }
  if (own_active_entry_ && own_active_entry_->covers(now)) return;  // my slot, I initiate

  MacFrame cts;
  cts.kind = FrameKind::cts;
  cts.transmitter = id_;
  cts.receiver = frame.transmitter;
  cts.air_time_us = sim_->timing().t_cts_us;
  cts.nav_until_end_us = frame.nav_until_end_us;
  ++pending_sends_;
  sim_->schedule_send(id_, now + sim_->params().sifs_us, cts, 0);
}

void MacNode::handle_cts(const MacFrame& frame, SimTime now) {
  if (frame.transmitter != batch_dest_) return;
  ++exchange_token_;  // cancel CTS timeout

  std::optional<RsiInstruction> rsi;
  if (batch_with_rsi_) {
    const SimTime data_air = ampdu_air_time(batch_, true, sim_->params());
    const SimTime data_end = now + sim_->params().sifs_us + data_air;
    rsi = maybe_build_rsi(data_end, now);
  }
  // The nav promise made at RTS time stands even if the pipeline declined.
  MacFrame data = build_ampdu(id_, batch_dest_, batch_, rsi, sim_->params());
  data.air_time_us = batch_data_air_;
  data.nav_until_end_us =
      now + sim_->params().sifs_us + batch_data_air_ + sim_->params().sifs_us +
      sim_->timing().t_ack_us;

  phase_ = MacPhase::awaiting_ack;
  ++pending_sends_;
  sim_->schedule_send(id_, now + sim_->params().sifs_us, data, exchange_token_);
  const SimTime deadline = now + sim_->params().sifs_us + batch_data_air_ +
                           sim_->params().sifs_us + sim_->timing().t_ack_us +
                           2 * sim_->params().slot_us;
  sim_->schedule_ack_timeout(id_, deadline, exchange_token_);
}

void MacNode::handle_data(const MacFrame& frame, SimTime now) {
  if (frame.rsi && node_from_addr(frame.rsi->owner_source) != id_) {
    hear_rsi(*frame.rsi, now, now, 1);
  }
  if (frame.receiver != id_) {
    nav_until_ = std::max(nav_until_, frame.nav_until_end_us);
    return;
  }

  for (const QueuedPacket& pkt : frame.mpdus) {
    if (seen_packet_ids_.contains(pkt.id)) continue;
    seen_packet_ids_.insert(pkt.id);
    sim_->packet_accepted(id_, pkt, now);
  }

  MacFrame ack;
  ack.kind = FrameKind::ack;
  ack.transmitter = id_;
  ack.receiver = frame.transmitter;
  ack.air_time_us = sim_->timing().t_ack_us;
  ack.nav_until_end_us = 0;
  if (frame.rsi) {
    // Forward the instruction with its offset rebased to this ACK's end so
    // second-hop listeners reconstruct the same absolute interval.
    const SimTime ack_end = now + sim_->params().sifs_us + sim_->timing().t_ack_us;
    const SimTime res_start = now + frame.rsi->offset_us;
    const SimTime res_end = res_start + frame.rsi->duration_us;
    if (res_end > ack_end) {
      RsiInstruction fwd = *frame.rsi;
      const SimTime eff_start = std::max(res_start, ack_end);
      fwd.offset_us = static_cast<std::uint32_t>(eff_start - ack_end);
      fwd.duration_us = static_cast<std::uint32_t>(res_end - eff_start);
      ack.rsi = fwd;
    }
  }
  ++pending_sends_;
  sim_->schedule_send(id_, now + sim_->params().sifs_us, ack, 0);
}

void MacNode::handle_ack(const MacFrame& frame, SimTime now) {
  if (frame.transmitter != batch_dest_) return;
  ++exchange_token_;  // cancel ACK timeout
  confirm_pending_reservation(now);
  batch_.clear();
  batch_dest_ = kNoNode;
  retry_ = 0;
  current_cw_ = bounds_.min_cw;
  continue_after_exchange(now, true);
}

void MacNode::on_cts_timeout(SimTime now, std::uint64_t token) {
  if (token != exchange_token_ || phase_ != MacPhase::awaiting_cts) return;
  sim_->trace().push({now, TraceKind::cts_timeout, id_, kNoNode, -1, retry_, 0, 0, 0.0});
  fail_exchange(now);
}

void MacNode::on_ack_timeout(SimTime now, std::uint64_t token) {
  if (token != exchange_token_ || phase_ != MacPhase::awaiting_ack) return;
  sim_->trace().push({now, TraceKind::ack_timeout, id_, kNoNode, -1, retry_, 0, 0, 0.0});
  fail_exchange(now);
}

void MacNode::fail_exchange(SimTime now) {
  const ProtocolParams& p = sim_->params();
  ++exchange_token_;
  abandon_pending_reservation();
  ++retry_;
  if (retry_ > p.retry_limit) {
    for (const QueuedPacket& pkt : batch_) sim_->packet_dropped_retry(id_, pkt, now);
    batch_.clear();
    batch_dest_ = kNoNode;
    retry_ = 0;
    current_cw_ = bounds_.min_cw;
  } else {
    current_cw_ = std::min(current_cw_ * 2 + 1, bounds_.max_cw);
  }
  continue_after_exchange(now, false);
}

void MacNode::continue_after_exchange(SimTime now, bool succeeded) {
  phase_ = MacPhase::idle;
  if (own_active_entry_ && own_active_entry_->covers(now)) {
    // A completed exchange keeps the floor; after a failure the slot is
    // contested ground and re-entry waits for the medium to settle.
    if (!queue_.empty() || !batch_.empty())
      sim_->schedule_initiate(id_, now + sim_->params().sifs_us, /*chained=*/succeeded);
    return;
  }
  maybe_sleep(now);
  if (phase_ == MacPhase::sleeping) return;
  if (!queue_.empty() || !batch_.empty()) enter_backoff(now, retry_ == 0);
}

void MacNode::on_initiate(SimTime now, bool chained) {
  if (phase_ != MacPhase::idle || radio_ != RadioState::rx_listen) return;
  if (pending_sends_ > 0) {
    sim_->schedule_initiate(id_, now + sim_->params().sifs_us, chained);
    return;
  }
  if (own_active_entry_ && own_active_entry_->covers(now)) {
    if (try_initiate(now, chained)) return;
    // Reserved time is still ours: retry once the medium has settled.
    if ((!queue_.empty() || !batch_.empty()) && own_active_entry_ &&
        own_active_entry_->covers(now)) {
      sim_->schedule_initiate(id_, now + sim_->pifs() + 1);
    }
  } else if (!queue_.empty() || !batch_.empty()) {
    enter_backoff(now, retry_ == 0);
  }
}

void MacNode::on_scheduled_send(const MacFrame& frame, SimTime now, std::uint64_t token) {
  --pending_sends_;
  if (phase_ == MacPhase::sleeping || radio_ == RadioState::tx) return;
  if (token != 0 && token != exchange_token_) return;  // exchange aborted meanwhile
  // Responses must honor reservations neither endpoint owns.
  if (frame.kind == FrameKind::ack || frame.kind == FrameKind::cts) {
    if (table_.first_nonparty_overlap(now, now + frame.air_time_us, id_, frame.receiver)) return;
  }
  sim_->transmit(id_, frame);
}

// ---------------------------------------------------------------------------
// Reservation pipeline.

std::optional<RsiInstruction> MacNode::maybe_build_rsi(SimTime data_end, SimTime now) {
  const ProtocolParams& p = sim_->params();
  if (variant_ == Variant::baseline_csma) return std::nullopt;

  // One outstanding reservation at a time. While it is still in the
  // future, every transmission repeats the announcement (rebased to this
  // frame's end) so listeners that slept through the original instruction
  // catch up before the slot begins.
  if (pending_own_entry_ && pending_own_entry_->start > data_end) {
    neighbors_.expire(now, p);
    wra_.refresh(queue_, neighbors_.fresh(now, p), now, p, true);
    return make_rsi(id_, pending_own_entry_->link_destination,
                    pending_own_entry_->start - data_end, pending_own_entry_->duration(),
                    wra_.own_wra);
  }
  if (pending_own_entry_) return std::nullopt;  // starts mid-frame, nothing to add

  // New reservations are initiated from contention-phase exchanges only:
  // an instruction first announced while bystanders sleep goes unheard and
  // invites overlapping blind claims (in-slot frames still repeat the
  // pending announcement above).
  if (own_active_entry_ && own_active_entry_->covers(now)) return std::nullopt;

  if (realtime_backlog_bytes() == 0) return std::nullopt;

  // Reserve for the link with the most real-time backlog; the slot serves
  // a single destination, so its duration is sized to that link alone.
  std::map<NodeId, std::uint64_t> backlog_by_hop;
  for (const QueuedPacket& pkt : queue_) {
    if (pkt.is_realtime) backlog_by_hop[next_hop_of(pkt)] += pkt.length_bytes;
  }
  NodeId link_dest = kNoNode;
  std::uint64_t backlog = 0;
  for (const auto& [hop, bytes] : backlog_by_hop) {
    if (bytes > backlog) {
      backlog = bytes;
      link_dest = hop;
    }
  }
  if (link_dest == kNoNode) return std::nullopt;

  const SimTime duration = reservation_duration(backlog, sim_->timing(), p);
  // The offset of a reservation made inside reserved time counts from the
  // end of the current reserved period; chaining straight off a mid-slot
  // frame would let a short offset queue the next slot back-to-back and
  // capture the channel.
  const SimTime anchor = own_active_entry_ && own_active_entry_->covers(now)
                             ? std::max(data_end, own_active_entry_->end)
                             : data_end;
  SimTime desired = 0;
  double lambda_used = 0.0;

  if (variant_ == Variant::fixed_reservation) {
    desired = p.fixed_offset_us;
  } else {
    neighbors_.expire(now, p);
    const auto fresh = neighbors_.fresh(now, p);
    wra_.refresh(queue_, fresh, now, p, true);
    const WraBytes threshold = congestion_wra_threshold(p);
    const bool any_congested =
        is_any_neighbor_congested(fresh, threshold) || wra_.own_wra >= threshold;

    SimTime raw;
    if (wra_.lambda.status == LambdaStatus::empty_contention_set) {
      raw = p.t_min_us;  // uncontended
    } else {
      double lambda = wra_.lambda.value;
      if (wra_.lambda.status == LambdaStatus::zero_neighbor_load) lambda = p.th_high;
      const SimTime t_basic = basic_offset(wra_.own_wra, fresh, p, sim_->t_access());
      raw = corrected_offset(t_basic, lambda, any_congested, p);
      lambda_used = lambda;
    }
    desired = smooth_offset(history_, raw, p);
  }

  table_.purge(now);
  const ReservationEntry entry =
      place_reservation(table_, anchor, desired, duration, id_, link_dest, p, sim_->timing());
  auto rsi = make_rsi(id_, link_dest, entry.start - data_end, duration, wra_.own_wra);
  if (!rsi) {
    table_.erase(entry);
    return std::nullopt;
  }
  pending_own_entry_ = entry;
  pending_confirmed_ = false;
  pending_smoothed_offset_ = desired;
  pending_lambda_ = lambda_used;
  return rsi;
}

void MacNode::confirm_pending_reservation(SimTime now) {
  if (!pending_own_entry_ || pending_confirmed_) return;
  pending_confirmed_ = true;
  if (variant_ == Variant::ftkn_crm) history_.push(pending_smoothed_offset_);
  sim_->schedule_reservation_events(id_, *pending_own_entry_);
  sim_->counters().reserved_us += pending_own_entry_->duration();
  sim_->trace().push({now, TraceKind::reservation_placed, id_,
                      pending_own_entry_->link_destination, -1, pending_own_entry_->start,
                      pending_own_entry_->end, pending_smoothed_offset_, pending_lambda_});
}

void MacNode::abandon_pending_reservation() {
  if (!pending_own_entry_ || pending_confirmed_) return;
  table_.erase(*pending_own_entry_);
  pending_own_entry_.reset();
}

void MacNode::hear_rsi(const RsiInstruction& rsi, SimTime frame_end, SimTime now,
                       int hop_distance) {
  const ProtocolParams& p = sim_->params();
  if (static_cast<SimTime>(rsi.duration_us) > p.d_max_us || rsi.duration_us == 0) return;

  const NodeId owner = node_from_addr(rsi.owner_source);
  neighbors_.hear(owner, dequantize_wra(rsi.wra_quantized), now, hop_distance);

  ReservationEntry entry;
  entry.owner_source = owner;
  entry.link_destination = node_from_addr(rsi.link_destination);
  entry.start = frame_end + rsi.offset_us;
  entry.end = entry.start + rsi.duration_us;
  entry.learned_from = hop_distance == 1 ? EntryOrigin::direct : EntryOrigin::ack_forwarded;

  table_.purge(now);
  const std::size_t before = table_.size();
  table_.insert_foreign(entry);
  sim_->trace().push({now, TraceKind::reservation_heard, id_, owner, -1, entry.start, entry.end,
                      static_cast<std::uint64_t>(hop_distance), 0.0});
  if (table_.size() > before || table_.covering(now)) {
    sim_->schedule_silence_check(id_, std::max(now, entry.start));
  }
}

// ---------------------------------------------------------------------------
// Own reservations.

void MacNode::on_reservation_start(SimTime now, const ReservationEntry& entry) {
  if (entry.end <= now) return;
  if (pending_own_entry_ && pending_own_entry_->start == entry.start) {
    pending_own_entry_.reset();
    pending_confirmed_ = false;
  }
  own_active_entry_ = entry;
  sim_->trace().push({now, TraceKind::reservation_own_start, id_, entry.link_destination, -1,
                      entry.start, entry.end, 0, 0.0});
  if (phase_ == MacPhase::sleeping) {
    on_wake(now);  // the wake path initiates inside the covering own slot
    return;
  }
  if (phase_ == MacPhase::awaiting_cts || phase_ == MacPhase::awaiting_ack) return;
  if (phase_ == MacPhase::backoff) {
    ++tick_token_;
    phase_ = MacPhase::idle;
  }
  if (!queue_.empty() || !batch_.empty()) sim_->schedule_initiate(id_, now);
}

void MacNode::on_reservation_end(SimTime now, const ReservationEntry& entry) {
  if (own_active_entry_ && own_active_entry_->start == entry.start) {
    own_active_entry_.reset();
    table_.purge(now);
    if (phase_ == MacPhase::idle) {
      maybe_sleep(now);
      if (phase_ != MacPhase::sleeping && (!queue_.empty() || !batch_.empty()))
        enter_backoff(now, retry_ == 0);
    }
  }
}

// ---------------------------------------------------------------------------
// Silencing and sleep.

void MacNode::maybe_sleep(SimTime now) {
  if (phase_ == MacPhase::sleeping || radio_ == RadioState::tx) return;
  if (phase_ == MacPhase::awaiting_cts || phase_ == MacPhase::awaiting_ack) return;
  if (pending_sends_ > 0) return;
  const auto cov = table_.covering(now);
  if (!cov || cov->owner_source == id_ || cov->link_destination == id_) return;

  if (phase_ == MacPhase::backoff) ++tick_token_;  // freeze counter, stop ticking
  phase_ = MacPhase::sleeping;
  radio_transition(now, RadioState::sleep);
  sim_->channel_drop_listener(id_);
  sim_->trace().push({now, TraceKind::sleep_start, id_, cov->owner_source, -1, cov->start,
                      cov->end, 0, 0.0});
  sim_->schedule_wake(id_, cov->end);
}

void MacNode::on_silence_check(SimTime now) { maybe_sleep(now); }

void MacNode::on_wake(SimTime now) {
  if (phase_ != MacPhase::sleeping) return;
  table_.purge(now);
  const auto cov = table_.covering(now);
  if (cov && cov->owner_source != id_ && cov->link_destination != id_) {
    sim_->schedule_wake(id_, cov->end);  // still covered, sleep on
    return;
  }
  phase_ = MacPhase::idle;
  radio_transition(now, RadioState::rx_listen);
  sim_->trace().push({now, TraceKind::wake, id_, kNoNode, -1, 0, 0, 0, 0.0});

  carrier_count_ = sim_->channel_active_in_range(id_);
  carrier_busy_start_ = now;
  carrier_last_end_ = now;

  if (own_active_entry_ && own_active_entry_->covers(now)) {
    if (!queue_.empty() || !batch_.empty()) sim_->schedule_initiate(id_, now);
  } else if (!queue_.empty() || !batch_.empty()) {
    // Resume the frozen counter rather than redrawing.
    phase_ = MacPhase::backoff;
    ++tick_token_;
    const SimTime slot = sim_->params().slot_us;
    sim_->schedule_slot_tick(id_, (now / slot + 1) * slot, tick_token_);
  }
}

// ---------------------------------------------------------------------------
// Carrier sense and periodic updates.

void MacNode::on_collision_observed(SimTime now) {
  eifs_until_ = std::max(eifs_until_, now + sim_->eifs());
}

void MacNode::on_carrier_busy(SimTime now) {
  if (carrier_count_ == 0) carrier_busy_start_ = now;
  ++carrier_count_;
}

void MacNode::on_carrier_idle(SimTime now) {
  if (carrier_count_ > 0) --carrier_count_;
  if (carrier_count_ == 0) {
    carrier_last_end_ = now;
    if (own_active_entry_ && own_active_entry_->covers(now) && phase_ == MacPhase::idle &&
        (!queue_.empty() || !batch_.empty())) {
      sim_->schedule_initiate(id_, now + sim_->params().sifs_us + 1);
    }
  }
}

void MacNode::on_wra_period(SimTime now) {
  const ProtocolParams& p = sim_->params();
  neighbors_.expire(now, p);
  const auto fresh = neighbors_.fresh(now, p);
  wra_.refresh(queue_, fresh, now, p, false);
}

void MacNode::tx_finished(SimTime now) {
  if (radio_ == RadioState::tx) radio_transition(now, RadioState::rx_listen);
}

bool MacNode::all_reservation_links_served(SimTime now) const {
  if (realtime_backlog_bytes() > 0) {
    const bool self_served = (own_active_entry_ && own_active_entry_->end > now) ||
                             table_.has_future_entry_owned_by(id_, now);
    if (!self_served) return false;
  }
  for (const NeighborRecord& rec : neighbors_.fresh(now, sim_->params())) {
    if (rec.wra > 0.0 && !table_.has_future_entry_owned_by(rec.node, now)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Energy.

void MacNode::radio_transition(SimTime now, RadioState next) {
  assert(now >= radio_since_);
  const SimTime span = now - radio_since_;
  switch (radio_) {
    case RadioState::rx_listen: energy_.rx_listen_us += span; break;
    case RadioState::tx: energy_.tx_us += span; break;
    case RadioState::sleep: energy_.sleep_us += span; break;
  }
  radio_ = next;
  radio_since_ = now;
}

void MacNode::finalize(SimTime end) { radio_transition(end, RadioState::rx_listen); }

}  // namespace crmsim
