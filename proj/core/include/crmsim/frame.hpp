#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "crmsim/packet.hpp"
#include "crmsim/params.hpp"
#include "crmsim/wra.hpp"

namespace crmsim {

using MacAddr = std::array<std::uint8_t, 6>;

// Locally administered address derived from the node index.
MacAddr addr_from_node(NodeId id);
NodeId node_from_addr(const MacAddr& a);

// Advertised weight is carried in 16 bits at a fixed quantization step,
// saturating at the field maximum.
constexpr double kWraQuantStepBytes = 16.0;

std::uint16_t quantize_wra(WraBytes wra);
WraBytes dequantize_wra(std::uint16_t q);

// Decoded reservation instruction field. Offsets are relative to the end
// of the frame that carried the instruction.
struct RsiInstruction {
  MacAddr owner_source{};
  MacAddr link_destination{};
  std::uint32_t offset_us = 0;
  std::uint32_t duration_us = 0;
  std::uint16_t wra_quantized = 0;

  bool operator==(const RsiInstruction&) const = default;
};

// Wire layout: owner(6) | destination(6) | offset(4, BE) | duration(4, BE)
// | wra(2, BE). 22 bytes total.
constexpr std::size_t kRsiWireBytes = 22;

enum class RsiEncodeStatus { ok, field_overflow };
enum class RsiDecodeStatus { ok, truncated_frame, invalid_duration };

RsiEncodeStatus encode_rsi(const RsiInstruction& instr,
                           std::array<std::uint8_t, kRsiWireBytes>& out);

struct RsiDecodeResult {
  RsiDecodeStatus status = RsiDecodeStatus::ok;
  RsiInstruction instruction;
};

RsiDecodeResult decode_rsi(std::span<const std::uint8_t> bytes, SimTime d_max_us);

// Builds the instruction from simulation-domain values; fails when a time
// field exceeds the 32-bit wire width.
std::optional<RsiInstruction> make_rsi(NodeId owner, NodeId destination, SimTime offset_us,
                                       SimTime duration_us, WraBytes wra);

enum class FrameKind { rts, cts, ack, data_ampdu };

// Simulation-level MAC frame. Header fields beyond kind, addresses and the
// duration announcement are opaque constants; the reservation instruction
// is the only part with a byte-exact layout.
struct MacFrame {
  FrameKind kind = FrameKind::rts;
  NodeId transmitter = kNoNode;
  NodeId receiver = kNoNode;     // kNoNode on broadcast-style frames
  SimTime air_time_us = 0;
  SimTime nav_until_end_us = 0;  // remaining exchange time announced to third parties
  std::vector<QueuedPacket> mpdus;          // data_ampdu only
  std::optional<RsiInstruction> rsi;        // data_ampdu or ack
};

// Per-MPDU aggregation overhead (delimiter), bytes.
constexpr std::uint32_t kMpduDelimiterBytes = 4;

// Air time of an aggregate carrying the given packets and, optionally, a
// reservation instruction as the final MPDU.
SimTime ampdu_air_time(std::span<const QueuedPacket> packets, bool with_rsi,
                       const ProtocolParams& p);

MacFrame build_ampdu(NodeId transmitter, NodeId receiver, std::vector<QueuedPacket> packets,
                     std::optional<RsiInstruction> rsi, const ProtocolParams& p);

}  // namespace crmsim
