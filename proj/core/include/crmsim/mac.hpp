#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "crmsim/frame.hpp"
#include "crmsim/packet.hpp"
#include "crmsim/params.hpp"
#include "crmsim/reservation.hpp"
#include "crmsim/trace.hpp"
#include "crmsim/wra.hpp"

namespace crmsim {

class Simulation;

enum class Variant { baseline_csma, fixed_reservation, ftkn_crm };

const char* variant_name(Variant v);
std::optional<Variant> variant_from_name(const std::string& name);

enum class CwClass : std::uint8_t { low, general, high };

struct CwBounds {
  std::uint32_t min_cw = 15;
  std::uint32_t max_cw = 31;
};

// Three-tier ladder: a class's window starts at its rung and may grow to
// the next rung up on retries. The first rung doubles as the real-time
// bounds of the non-adaptive variants.
CwBounds cw_bounds(CwClass c, const ProtocolParams& p);

// Contention-window class choice of the adaptive variant: nodes whose
// correction factor marks them as locally dominant contend aggressively;
// nodes whose reservation-needing links are all served back off; everyone
// else uses the general class. When both rules apply, low wins.
CwClass select_cw_class(double lambda, bool pending_reservation_links_all_served,
                        const ProtocolParams& p);

enum class MacPhase : std::uint8_t {
  idle,
  backoff,
  awaiting_cts,
  awaiting_ack,
  sleeping,
};

enum class RadioState : std::uint8_t { rx_listen, tx, sleep };

// Per-node MAC state machine. All entry points are invoked by the event
// loop with run-to-completion semantics; the node owns its queue,
// reservation table, neighbor records and offset history exclusively.
class MacNode {
 public:
  MacNode(Simulation* sim, NodeId id, Variant variant);

  NodeId id() const { return id_; }
  MacPhase phase() const { return phase_; }
  bool sleeping() const { return phase_ == MacPhase::sleeping; }
  RadioState radio() const { return radio_; }
  std::size_t queue_length() const { return queue_.size(); }
  std::size_t in_flight() const { return batch_.size(); }
  const ReservationTable& reservation_table() const { return table_; }
  const EnergyAccumulator& energy() const { return energy_; }

  // Traffic and relay input. Drops and counts the packet when the buffer
  // is full.
  void enqueue(QueuedPacket pkt, SimTime now);

  // Event-loop entry points.
  void on_slot_tick(SimTime now, std::uint64_t token);
  void on_frame_received(const MacFrame& frame, SimTime now);
  void on_collision_observed(SimTime now);
  void on_carrier_busy(SimTime now);
  void on_carrier_idle(SimTime now);
  void on_scheduled_send(const MacFrame& frame, SimTime now, std::uint64_t token);
  void on_initiate(SimTime now, bool chained);
  void on_cts_timeout(SimTime now, std::uint64_t token);
  void on_ack_timeout(SimTime now, std::uint64_t token);
  void on_reservation_start(SimTime now, const ReservationEntry& entry);
  void on_reservation_end(SimTime now, const ReservationEntry& entry);
  void on_silence_check(SimTime now);
  void on_wake(SimTime now);
  void on_wra_period(SimTime now);
  void tx_finished(SimTime now);

  // Called once when the run ends.
  void finalize(SimTime end);

 private:
  // Contention.
  void enter_backoff(SimTime now, bool fresh_window);
  bool can_count_down(SimTime tick) const;
  bool try_initiate(SimTime now, bool chained = false);
  void gather_batch(SimTime now, NodeId preferred_dest, SimTime data_air_budget);
  void gather_batch_for(SimTime now, NodeId dest, SimTime data_air_budget);
  NodeId next_hop_of(const QueuedPacket& pkt) const;

  // Exchange steps.
  void send_rts(SimTime now);
  void handle_cts(const MacFrame& frame, SimTime now);
  void handle_data(const MacFrame& frame, SimTime now);
  void handle_ack(const MacFrame& frame, SimTime now);
  void handle_rts(const MacFrame& frame, SimTime now);
  void fail_exchange(SimTime now);
  void continue_after_exchange(SimTime now, bool succeeded);

  // Reservation pipeline (runs while assembling the data frame).
  std::optional<RsiInstruction> maybe_build_rsi(SimTime data_end, SimTime now);
  void confirm_pending_reservation(SimTime now);
  void abandon_pending_reservation();
  void hear_rsi(const RsiInstruction& rsi, SimTime frame_end, SimTime now, int hop_distance);

  // Silencing.
  void maybe_sleep(SimTime now);
  std::uint64_t realtime_backlog_bytes() const;
  bool all_reservation_links_served(SimTime now) const;

  // Energy bookkeeping.
  void radio_transition(SimTime now, RadioState next);

  SimTime exchange_air(SimTime data_air) const;
  SimTime control_overhead() const;

  Simulation* sim_;
  NodeId id_;
  Variant variant_;

  MacPhase phase_ = MacPhase::idle;
  RadioState radio_ = RadioState::rx_listen;
  SimTime radio_since_ = 0;
  EnergyAccumulator energy_;

  std::vector<QueuedPacket> queue_;
  std::vector<QueuedPacket> batch_;
  NodeId batch_dest_ = kNoNode;
  bool batch_with_rsi_ = false;
  SimTime batch_data_air_ = 0;

  std::uint32_t backoff_counter_ = 0;
  std::uint32_t current_cw_ = 15;
  CwBounds bounds_;
  CwClass cw_class_ = CwClass::general;
  std::uint32_t retry_ = 0;

  SimTime nav_until_ = 0;
  SimTime eifs_until_ = 0;
  int carrier_count_ = 0;
  SimTime carrier_busy_start_ = 0;
  SimTime carrier_last_end_ = 0;

  ReservationTable table_;
  OffsetHistory history_;
  NeighborTable neighbors_;
  WraState wra_;
  std::optional<ReservationEntry> own_active_entry_;
  // The next reservation this node holds. It is tentative from the data
  // frame that announces it until that frame's ACK; only a confirmed entry
  // is scheduled, smoothed into history, and counted.
  std::optional<ReservationEntry> pending_own_entry_;
  bool pending_confirmed_ = false;
  SimTime pending_smoothed_offset_ = 0;
  double pending_lambda_ = 0.0;

  std::uint64_t tick_token_ = 0;
  std::uint64_t exchange_token_ = 0;
  int pending_sends_ = 0;

  std::unordered_set<std::uint64_t> seen_packet_ids_;

  friend class Simulation;
};

}  // namespace crmsim
