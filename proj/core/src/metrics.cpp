#include "crmsim/metrics.hpp"

namespace crmsim {

double MetricsReport::mean_node_energy_mJ() const {
  if (per_node_energy_mJ.empty()) return 0.0;
  double sum = 0.0;
  for (double e : per_node_energy_mJ) sum += e;
  return sum / static_cast<double>(per_node_energy_mJ.size());
}

double energy_mJ(const EnergyAccumulator& e, const ProtocolParams& p) {
  // mW * us = nJ; scale to mJ.
  const double njoules = p.tx_power_mw * static_cast<double>(e.tx_us) +
                         p.rx_power_mw * static_cast<double>(e.rx_listen_us) +
                         p.sleep_power_mw * static_cast<double>(e.sleep_us);
  return njoules * 1e-6;
}

MetricsReport collect(const Trace& trace, const ProtocolParams& p) {
  MetricsReport r;
  const RunCounters& c = trace.counters();

  std::uint64_t delivered_bytes = 0;
  double delay_sum = 0.0;
  std::uint64_t delay_count = 0;
  for (const TraceRecord& rec : trace.records()) {
    if (rec.kind == TraceKind::deliver_final) {
      delivered_bytes += rec.c;
      delay_sum += static_cast<double>(rec.b);
      ++delay_count;
    }
  }

  const double duration_s = seconds(trace.duration_us());
  if (duration_s > 0.0)
    r.end_to_end_throughput_bits_per_s = static_cast<double>(delivered_bytes) * 8.0 / duration_s;
  if (delay_count > 0) r.mean_end_to_end_delay_us = delay_sum / static_cast<double>(delay_count);

  r.per_node_energy_mJ.reserve(trace.energy().size());
  r.energy_partition_ok = true;
  for (const EnergyAccumulator& e : trace.energy()) {
    r.per_node_energy_mJ.push_back(energy_mJ(e, p));
    if (e.total() != trace.duration_us()) r.energy_partition_ok = false;
  }

  r.drops_buffer = c.drops_buffer;
  r.drops_retry = c.drops_retry;
  r.collisions = c.collisions;
  r.generated = c.generated;
  r.delivered = c.delivered;
  r.rsi_mpdus = c.rsi_mpdus;
  r.soundness_violations = c.soundness_violations;
  if (c.reserved_us > 0)
    r.reservation_utilization =
        static_cast<double>(c.reserved_used_us) / static_cast<double>(c.reserved_us);

  std::uint64_t residual = 0;
  for (std::uint64_t q : trace.residual_packets()) residual += q;
  r.conservation_ok =
      c.generated == c.delivered + c.drops_buffer + c.drops_retry + residual;

  r.trace_hash = trace.hash();
  return r;
}

}  // namespace crmsim
