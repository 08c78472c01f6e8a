#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "crmsim/time.hpp"

namespace crmsim {

// How the correction factor is bounded before dividing the basic offset.
// `ratio` keeps the committed offset within [th_low, th_high] * t_basic
// (lambda clamped into [1/th_high, 1/th_low]); `lambda` bounds lambda
// itself into [th_low, th_high]. Both readings circulate; ratio is the
// default.
enum class ClampMode { ratio, lambda };

// Network-wide protocol configuration. Every node in a run shares one
// instance; the mean weight factor in particular must be agreed on by all
// nodes so they can convert an advertised reservation weight back into a
// byte estimate.
struct ProtocolParams {
  // Queue weighting.
  double weight_local = 0.4;   // alpha for packets never forwarded
  double weight_relay = 1.0;   // alpha for packets forwarded >= 1 time
  double mean_weight = 0.7;    // network-wide constant, (local + relay) / 2

  // Congestion detection.
  double th_buffer = 0.40;
  std::uint32_t buffer_capacity_packets = 100;
  std::uint32_t mean_packet_bytes = 1500;

  // Reservation shaping.
  double th_res = 0.6;    // max fraction of channel time occupied by reservations
  double th_low = 0.5;    // lower bound of committed_offset / t_basic
  double th_high = 4.0;   // upper bound of committed_offset / t_basic
  double th_less = 1.5;   // lambda above this switches contention to the low CW class
  double w_n = 0.6;       // inertia factor
  std::uint32_t inertia_depth_n = 3;
  ClampMode clamp_mode = ClampMode::ratio;

  // Times (integer microseconds).
  SimTime t_min_us = 2000;     // offset used when nobody is congested
  SimTime t_betmin_us = 500;   // minimum spacing snapped to when a gap would fragment
  SimTime d_max_us = 5000;     // maximum reservation duration
  SimTime sifs_us = 64;
  SimTime slot_us = 36;
  SimTime wra_update_period_us = 50000;
  std::optional<SimTime> t_access_us;  // derived from frame timing when unset

  // PHY abstraction.
  double v_phy_bits_per_us = 24.0;  // 24 Mbps
  SimTime t_rts_us = 50;
  SimTime t_cts_us = 50;
  SimTime t_ack_us = 50;

  // Cap on one contention-won exchange, all variants alike (reserved slots
  // run to their own duration instead).
  SimTime txop_limit_us = 2528;

  // Contention windows. The three-class ladder used by the adaptive
  // variant; the ladder's first rung doubles as the real-time CW bounds
  // (min 7, max 15) of the non-reserving variants.
  std::uint32_t cw_low = 7;
  std::uint32_t cw_general = 15;
  std::uint32_t cw_high = 31;

  // Fixed-offset comparison variant.
  SimTime fixed_offset_us = 8000;

  // Radio power draw, milliwatts.
  double tx_power_mw = 24.0;
  double rx_power_mw = 13.5;
  double sleep_power_mw = 0.015;

  // Retry policy.
  std::uint32_t retry_limit = 7;
};

// Table defaults for the simulated setup.
ProtocolParams default_params();

// Returns an empty string when every invariant holds, otherwise the name
// of the first offending field plus a message.
std::string validate_params(const ProtocolParams& p);

// Fixed control-frame and per-MPDU air times used by the fragmentation
// and duration formulas.
struct FrameTiming {
  SimTime t_rts_us = 50;
  SimTime t_cts_us = 50;
  SimTime t_ack_us = 50;
  SimTime t_data_us = 500;  // one full-size MPDU at v_phy
  SimTime sifs_us = 64;
};

FrameTiming frame_timing_from(const ProtocolParams& p);

// Channel access time: control-frame overhead of one minimal exchange plus
// the mean backoff of the general contention class. Used as the per-node
// constant in the basic-offset sum unless the config pins a value.
SimTime effective_t_access(const ProtocolParams& p, const FrameTiming& t);

}  // namespace crmsim
