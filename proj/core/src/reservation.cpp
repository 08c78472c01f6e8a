#include "crmsim/reservation.hpp"

#include <algorithm>
#include <cassert>

namespace crmsim {

namespace {

bool starts_before(const ReservationEntry& a, const ReservationEntry& b) {
  return a.start < b.start;
}

}  // namespace

void ReservationTable::insert(const ReservationEntry& entry) {
  assert(entry.start < entry.end);
  auto it = std::lower_bound(entries_.begin(), entries_.end(), entry, starts_before);
  assert(it == entries_.end() || !it->overlaps(entry.start, entry.end));
  assert(it == entries_.begin() || !std::prev(it)->overlaps(entry.start, entry.end));
  entries_.insert(it, entry);
}

void ReservationTable::insert_foreign(const ReservationEntry& entry) {
  if (entry.start >= entry.end) return;
  // Carve the announcement around everything already known; the leftover
  // pieces keep the announcing owner so silencing covers the heard union.
  SimTime cursor = entry.start;
  std::vector<ReservationEntry> pieces;
  for (const ReservationEntry& e : entries_) {
    if (e.end <= cursor) continue;
    if (e.start >= entry.end) break;
    if (e.start > cursor) {
      ReservationEntry piece = entry;
      piece.start = cursor;
      piece.end = e.start;
      pieces.push_back(piece);
    }
    cursor = std::max(cursor, e.end);
    if (cursor >= entry.end) break;
  }
  if (cursor < entry.end) {
    ReservationEntry piece = entry;
    piece.start = cursor;
    pieces.push_back(piece);
  }
  for (const ReservationEntry& piece : pieces) insert(piece);
}

void ReservationTable::purge(SimTime now) {
  std::erase_if(entries_, [now](const ReservationEntry& e) { return e.end <= now; });
}

bool ReservationTable::erase(const ReservationEntry& entry) {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const ReservationEntry& e) {
    return e.owner_source == entry.owner_source && e.start == entry.start && e.end == entry.end;
  });
  if (it == entries_.end()) return false;
  entries_.erase(it);
  return true;
}

std::optional<ReservationEntry> ReservationTable::covering(SimTime now) const {
  for (const ReservationEntry& e : entries_) {
    if (e.start > now) break;
    if (e.covers(now)) return e;
  }
  return std::nullopt;
}

std::optional<ReservationEntry> ReservationTable::next_starting_at_or_after(SimTime t) const {
  for (const ReservationEntry& e : entries_) {
    if (e.start >= t) return e;
  }
  return std::nullopt;
}

std::optional<ReservationEntry> ReservationTable::first_foreign_overlap(SimTime s, SimTime e,
                                                                        NodeId self) const {
  for (const ReservationEntry& entry : entries_) {
    if (entry.start >= e) break;
    if (entry.owner_source != self && entry.overlaps(s, e)) return entry;
  }
  return std::nullopt;
}

std::optional<ReservationEntry> ReservationTable::first_nonparty_overlap(SimTime s, SimTime e,
                                                                         NodeId self,
                                                                         NodeId peer) const {
  for (const ReservationEntry& entry : entries_) {
    if (entry.start >= e) break;
    if (!entry.overlaps(s, e)) continue;
    if (entry.owner_source == self || entry.owner_source == peer) continue;
    return entry;
  }
  return std::nullopt;
}

bool ReservationTable::has_future_entry_owned_by(NodeId owner, SimTime now) const {
  for (const ReservationEntry& e : entries_) {
    if (e.owner_source == owner && e.end > now) return true;
  }
  return false;
}

bool ReservationTable::invariant_holds() const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].start >= entries_[i].end) return false;
    if (i > 0 && entries_[i - 1].end > entries_[i].start) return false;
  }
  return true;
}

void OffsetHistory::push(SimTime committed) {
  ring_.insert(ring_.begin(), committed);
  if (ring_.size() > depth_) ring_.resize(depth_);
}

SimTime basic_offset(WraBytes own_wra, std::span<const NeighborRecord> neighbors,
                     const ProtocolParams& p, SimTime t_access_us) {
  double sum_us = 0.0;
  auto member_time = [&](WraBytes wra) {
    if (wra <= 0.0) return 0.0;  // nothing queued, nothing to wait for
    const double bytes = wra / p.mean_weight;
    const double air = bytes * 8.0 / p.v_phy_bits_per_us + static_cast<double>(t_access_us);
    return std::min(static_cast<double>(p.d_max_us), air);
  };
  sum_us += member_time(own_wra);
  for (const NeighborRecord& n : neighbors) sum_us += member_time(n.wra);
  return to_sim_time(sum_us / p.th_res);
}

SimTime corrected_offset(SimTime t_basic, double lambda, bool any_congested,
                         const ProtocolParams& p) {
  if (!any_congested) return p.t_min_us;
  double lo, hi;
  if (p.clamp_mode == ClampMode::ratio) {
    lo = 1.0 / p.th_high;
    hi = 1.0 / p.th_low;
  } else {
    lo = p.th_low;
    hi = p.th_high;
  }
  // lambda <= 0 lands on the lower bound, i.e. the maximum offset: a node
  // with nothing queued has no claim to an early slot.
  const double bounded = std::clamp(lambda, lo, hi);
  return to_sim_time(static_cast<double>(t_basic) / bounded);
}

SimTime smooth_offset(const OffsetHistory& history, SimTime raw, const ProtocolParams& p) {
  const auto past = history.values();
  if (past.empty()) return raw;
  double sum = 0.0;
  for (SimTime v : past) sum += static_cast<double>(v);
  const double mean = sum / static_cast<double>(past.size());
  return to_sim_time(p.w_n * mean + (1.0 - p.w_n) * static_cast<double>(raw));
}

SimTime frag_interval(std::uint32_t ampdu_count_m, const FrameTiming& t) {
  assert(ampdu_count_m >= 1);
  return t.t_rts_us + t.sifs_us + t.t_cts_us + t.sifs_us +
         static_cast<SimTime>(ampdu_count_m) * t.t_data_us + t.sifs_us + t.t_ack_us;
}

SimTime reservation_duration(std::uint64_t realtime_backlog_bytes, const FrameTiming& t,
                             const ProtocolParams& p) {
  assert(realtime_backlog_bytes > 0);
  const double data_us = static_cast<double>(realtime_backlog_bytes) * 8.0 / p.v_phy_bits_per_us;
  const SimTime control = frag_interval(1, t) - t.t_data_us;
  const double total = data_us + static_cast<double>(control);
  return std::min(p.d_max_us, to_sim_time(total));
}

ReservationEntry place_reservation(ReservationTable& table, SimTime now, SimTime desired_offset,
                                   SimTime duration, NodeId owner, NodeId link_destination,
                                   const ProtocolParams& p, const FrameTiming& timing) {
  assert(duration > 0 && duration <= p.d_max_us);
  const SimTime t_frag = frag_interval(1, timing);
  const auto& entries = table.entries();

  SimTime start = now + desired_offset;
  for (;;) {
    // Overlap: the only non-overlapping positions at or after `start` lie
    // past the blocking entry, and a zero gap is below t_betmin anyway.
    const ReservationEntry* blocker = nullptr;
    for (const ReservationEntry& e : entries) {
      if (e.start >= start + duration) break;
      if (e.overlaps(start, start + duration)) {
        blocker = &e;
        break;
      }
    }
    if (blocker != nullptr) {
      start = blocker->end + p.t_betmin_us;
      continue;
    }
    // Anti-fragmentation against the latest entry ending at or before start.
    const ReservationEntry* prev = nullptr;
    for (const ReservationEntry& e : entries) {
      if (e.end <= start) prev = &e;
      if (e.start > start) break;
    }
    if (prev == nullptr) break;
    const SimTime gap = start - prev->end;
    if (gap == p.t_betmin_us || gap >= t_frag) break;
    // Smallest legal gap not below the current one: t_betmin if still
    // reachable and tighter than a full fragmentation interval.
    SimTime next_gap = t_frag;
    if (p.t_betmin_us >= gap && p.t_betmin_us < t_frag) next_gap = p.t_betmin_us;
    start = prev->end + next_gap;
  }

  ReservationEntry entry{owner, link_destination, start, start + duration, EntryOrigin::self};
  table.insert(entry);
  return entry;
}

}  // namespace crmsim
