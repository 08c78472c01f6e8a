#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "crmsim/packet.hpp"
#include "crmsim/time.hpp"

namespace crmsim {

enum class TraceKind : std::uint8_t {
  tx_start,
  tx_end,
  rx_ok,
  rx_collision,
  backoff_enter,
  cts_timeout,
  ack_timeout,
  drop_buffer,
  drop_retry,
  deliver_final,
  reservation_placed,
  reservation_heard,
  reservation_own_start,
  sleep_start,
  wake,
};

const char* trace_kind_name(TraceKind k);

// One structured event-stream record. The generic fields carry
// kind-specific values; see the emitting sites in the MAC engine.
struct TraceRecord {
  SimTime t = 0;
  TraceKind kind = TraceKind::tx_start;
  NodeId node = kNoNode;
  NodeId peer = kNoNode;
  int frame = -1;  // FrameKind when a frame is involved
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t c = 0;
  double x = 0.0;
};

// Per-node air-time partition; tx + rx_listen + sleep must equal the run
// duration exactly.
struct EnergyAccumulator {
  SimTime tx_us = 0;
  SimTime rx_listen_us = 0;
  SimTime sleep_us = 0;

  SimTime total() const { return tx_us + rx_listen_us + sleep_us; }
};

struct RunCounters {
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t drops_buffer = 0;
  std::uint64_t drops_retry = 0;
  std::uint64_t collisions = 0;
  std::uint64_t rsi_mpdus = 0;
  std::uint64_t rsi_bytes = 0;
  SimTime reserved_us = 0;       // summed own-reservation durations
  SimTime reserved_used_us = 0;  // transmit air time spent inside own reservations
  std::uint64_t soundness_violations = 0;
};

class Trace {
 public:
  void push(const TraceRecord& r) { records_.push_back(r); }
  const std::vector<TraceRecord>& records() const { return records_; }

  RunCounters& counters() { return counters_; }
  const RunCounters& counters() const { return counters_; }

  std::vector<EnergyAccumulator>& energy() { return energy_; }
  const std::vector<EnergyAccumulator>& energy() const { return energy_; }

  std::vector<std::uint64_t>& residual_packets() { return residual_; }
  const std::vector<std::uint64_t>& residual_packets() const { return residual_; }

  SimTime duration_us() const { return duration_us_; }
  void set_duration_us(SimTime d) { duration_us_ = d; }

  // Newline-delimited structured records plus summary trailer lines.
  void serialize(std::ostream& out) const;

  // FNV-1a over the serialized stream; identical runs hash identically.
  std::uint64_t hash() const;

 private:
  std::vector<TraceRecord> records_;
  RunCounters counters_;
  std::vector<EnergyAccumulator> energy_;
  std::vector<std::uint64_t> residual_;
  SimTime duration_us_ = 0;
};

// Locale-independent float formatting shared by the trace and CSV writers.
std::string format_double(double v);

}  // namespace crmsim
