#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "crmsim/packet.hpp"
#include "crmsim/params.hpp"
#include "crmsim/wra.hpp"

namespace crmsim {

enum class EntryOrigin { self, direct, ack_forwarded };

// One reserved half-open interval [start, end) owned by a link.
struct ReservationEntry {
  NodeId owner_source = kNoNode;
  NodeId link_destination = kNoNode;
  SimTime start = 0;
  SimTime end = 0;
  EntryOrigin learned_from = EntryOrigin::self;

  SimTime duration() const { return end - start; }
  bool covers(SimTime t) const { return start <= t && t < end; }
  bool overlaps(SimTime s, SimTime e) const { return start < e && s < end; }
};

// A node's view of all reserved time it has heard about, plus its own
// commitments. Entries are kept sorted by start and pairwise
// non-overlapping; foreign announcements that overlap existing entries are
// trimmed so the stored set still covers exactly the union of everything
// heard.
class ReservationTable {
 public:
  const std::vector<ReservationEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  // Inserts a conflict-free entry (used by placement). Aborts if it would
  // overlap; placement guarantees it never does.
  void insert(const ReservationEntry& entry);

  // Inserts an overheard announcement, trimming it around existing entries
  // so the table keeps covering the union of all heard reservations.
  void insert_foreign(const ReservationEntry& entry);

  // Drops entries that ended at or before `now`.
  void purge(SimTime now);

  // Removes an exact entry (an abandoned own placement). Returns false if
  // it is no longer present.
  bool erase(const ReservationEntry& entry);

  // Entry covering `now`, if any: the MAC engine silences or transmits
  // depending on ownership.
  std::optional<ReservationEntry> covering(SimTime now) const;

  // First entry starting at or after `t`.
  std::optional<ReservationEntry> next_starting_at_or_after(SimTime t) const;

  // First entry not owned by `self` that overlaps [s, e).
  std::optional<ReservationEntry> first_foreign_overlap(SimTime s, SimTime e, NodeId self) const;

  // First overlapping entry whose owner is neither endpoint of the
  // exchange; such an entry belongs to a reservation the pair is not a
  // party to and must not be transmitted over.
  std::optional<ReservationEntry> first_nonparty_overlap(SimTime s, SimTime e, NodeId self,
                                                         NodeId peer) const;

  // True when the node holds a future or running entry it owns.
  bool has_future_entry_owned_by(NodeId owner, SimTime now) const;

  bool invariant_holds() const;

 private:
  std::vector<ReservationEntry> entries_;  // sorted by start
};

// Ring of the last n committed offsets, newest first.
class OffsetHistory {
 public:
  explicit OffsetHistory(std::uint32_t depth = 3) : depth_(depth == 0 ? 1 : depth) {}

  void push(SimTime committed);
  std::span<const SimTime> values() const { return {ring_.data(), ring_.size()}; }
  std::size_t size() const { return ring_.size(); }
  void set_depth(std::uint32_t depth) { depth_ = depth == 0 ? 1 : depth; }

 private:
  std::uint32_t depth_;
  std::vector<SimTime> ring_;
};

// Offset that would let every recorded contention-set member (self
// included) transmit once: each member's weight converted back to bytes via
// the shared mean weight, turned into air time at the PHY rate plus access
// overhead, capped per node, summed, and stretched so reservations leave
// (1 - th_res) of the channel to random contention. Members with zero
// weight contribute nothing.
SimTime basic_offset(WraBytes own_wra, std::span<const NeighborRecord> neighbors,
                     const ProtocolParams& p, SimTime t_access_us);

// Congestion-gated offset correction: with no congested member anywhere the
// minimum offset applies; otherwise the basic offset is divided by the
// bounded correction factor, so heavier-than-average nodes reserve sooner.
// A non-positive lambda degrades to the maximum allowed offset.
SimTime corrected_offset(SimTime t_basic, double lambda, bool any_congested,
                         const ProtocolParams& p);

// Inertia smoothing: blends the mean of the last n committed offsets with
// the freshly computed one. An empty history passes the raw value through;
// a partial history averages over what exists.
SimTime smooth_offset(const OffsetHistory& history, SimTime raw, const ProtocolParams& p);

// Air time of one full exchange carrying m aggregated MPDUs. Gaps between
// reservations shorter than this cannot host a complete exchange and are
// wasted.
SimTime frag_interval(std::uint32_t ampdu_count_m, const FrameTiming& t);

// Time to reserve for a backlog of the given size: transmit time at the PHY
// rate plus one exchange's control overhead, capped at the maximum
// reservation duration.
SimTime reservation_duration(std::uint64_t realtime_backlog_bytes, const FrameTiming& t,
                             const ProtocolParams& p);

// Conflict-free placement: starting from now + desired_offset the candidate
// is panned later in time to the earliest start that overlaps nothing and
// whose gap to the latest earlier entry is exactly t_betmin or at least the
// fragmentation interval. The committed entry is inserted into the table.
ReservationEntry place_reservation(ReservationTable& table, SimTime now, SimTime desired_offset,
                                   SimTime duration, NodeId owner, NodeId link_destination,
                                   const ProtocolParams& p, const FrameTiming& timing);

}  // namespace crmsim
