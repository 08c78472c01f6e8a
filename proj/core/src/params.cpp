#include "crmsim/params.hpp"

#include "crmsim/reservation.hpp"

namespace crmsim {

ProtocolParams default_params() { return ProtocolParams{}; }

std::string validate_params(const ProtocolParams& p) {
  if (p.weight_local <= 0.0) return "weight_local: must be > 0";
  if (!(p.weight_local < p.weight_relay))
    return "weight_local: must be smaller than weight_relay";
  if (p.mean_weight <= 0.0) return "mean_weight: must be > 0";
  if (p.th_buffer < 0.0 || p.th_buffer > 1.0) return "th_buffer: must lie in [0, 1]";
  if (p.buffer_capacity_packets == 0) return "buffer_capacity_packets: must be >= 1";
  if (p.mean_packet_bytes == 0) return "mean_packet_bytes: must be >= 1";
  if (!(p.th_res > 0.0 && p.th_res <= 1.0))
    return "th_res: must lie in (0, 1]; 0 would make the offset division undefined";
  if (!(p.th_low > 0.0)) return "th_low: must be > 0";
  if (!(p.th_low <= p.th_high)) return "th_low: must be <= th_high";
  if (!(p.w_n >= 0.0 && p.w_n < 1.0)) return "w_n: must lie in [0, 1)";
  if (p.inertia_depth_n == 0) return "inertia_depth_n: must be >= 1";
  if (p.d_max_us == 0) return "d_max_us: must be > 0";
  if (p.v_phy_bits_per_us <= 0.0) return "v_phy_bits_per_us: must be > 0";
  if (!(p.cw_low < p.cw_general && p.cw_general < p.cw_high))
    return "cw_low/cw_general/cw_high: must be strictly increasing";
  if (p.slot_us == 0) return "slot_us: must be > 0";
  return {};
}

FrameTiming frame_timing_from(const ProtocolParams& p) {
  FrameTiming t;
  t.t_rts_us = p.t_rts_us;
  t.t_cts_us = p.t_cts_us;
  t.t_ack_us = p.t_ack_us;
  t.sifs_us = p.sifs_us;
  t.t_data_us =
      to_sim_time(static_cast<double>(p.mean_packet_bytes) * 8.0 / p.v_phy_bits_per_us);
  return t;
}

SimTime effective_t_access(const ProtocolParams& p, const FrameTiming& t) {
  if (p.t_access_us) return *p.t_access_us;
  const SimTime control = frag_interval(1, t) - t.t_data_us;
  const SimTime mean_backoff = to_sim_time(p.cw_general / 2.0 * static_cast<double>(p.slot_us));
  return control + mean_backoff;
}

}  // namespace crmsim
