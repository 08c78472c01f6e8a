#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "crmsim/params.hpp"
#include "crmsim/trace.hpp"

namespace crmsim {

struct MetricsReport {
  double end_to_end_throughput_bits_per_s = 0.0;
  std::optional<double> mean_end_to_end_delay_us;
  std::vector<double> per_node_energy_mJ;
  std::uint64_t drops_buffer = 0;
  std::uint64_t drops_retry = 0;
  std::uint64_t collisions = 0;
  double reservation_utilization = 0.0;
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t rsi_mpdus = 0;
  std::uint64_t soundness_violations = 0;
  bool conservation_ok = false;
  bool energy_partition_ok = false;
  std::uint64_t trace_hash = 0;

  double mean_node_energy_mJ() const;
};

double energy_mJ(const EnergyAccumulator& e, const ProtocolParams& p);

// Derives the report from a completed run's trace: throughput counts only
// final-destination deliveries, delay spans generation to final delivery,
// and the conservation identity is checked exactly.
MetricsReport collect(const Trace& trace, const ProtocolParams& p);

}  // namespace crmsim
