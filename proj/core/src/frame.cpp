#include "crmsim/frame.hpp"

#include <cassert>
#include <cmath>
#include <limits>

namespace crmsim {

namespace {

void put_u32_be(std::uint8_t* out, std::uint32_t v) {
  out[0] = static_cast<std::uint8_t>(v >> 24);
  out[1] = static_cast<std::uint8_t>(v >> 16);
  out[2] = static_cast<std::uint8_t>(v >> 8);
  out[3] = static_cast<std::uint8_t>(v);
}

std::uint32_t get_u32_be(const std::uint8_t* in) {
  return (static_cast<std::uint32_t>(in[0]) << 24) | (static_cast<std::uint32_t>(in[1]) << 16) |
         (static_cast<std::uint32_t>(in[2]) << 8) | static_cast<std::uint32_t>(in[3]);
}

}  // namespace

MacAddr addr_from_node(NodeId id) {
  // 02:... marks the block locally administered.
  return MacAddr{0x02, 0x00,
                 static_cast<std::uint8_t>(id >> 24), static_cast<std::uint8_t>(id >> 16),
                 static_cast<std::uint8_t>(id >> 8),  static_cast<std::uint8_t>(id)};
}

NodeId node_from_addr(const MacAddr& a) {
  return (static_cast<NodeId>(a[2]) << 24) | (static_cast<NodeId>(a[3]) << 16) |
         (static_cast<NodeId>(a[4]) << 8) | static_cast<NodeId>(a[5]);
}

std::uint16_t quantize_wra(WraBytes wra) {
  if (wra <= 0.0) return 0;
  const double units = std::floor(wra / kWraQuantStepBytes + 0.5);
  if (units >= 65535.0) return 65535;
  return static_cast<std::uint16_t>(units);
}

WraBytes dequantize_wra(std::uint16_t q) {
  return static_cast<WraBytes>(q) * kWraQuantStepBytes;
}

RsiEncodeStatus encode_rsi(const RsiInstruction& instr,
                           std::array<std::uint8_t, kRsiWireBytes>& out) {
  std::copy(instr.owner_source.begin(), instr.owner_source.end(), out.begin());
  std::copy(instr.link_destination.begin(), instr.link_destination.end(), out.begin() + 6);
  put_u32_be(out.data() + 12, instr.offset_us);
  put_u32_be(out.data() + 16, instr.duration_us);
  out[20] = static_cast<std::uint8_t>(instr.wra_quantized >> 8);
  out[21] = static_cast<std::uint8_t>(instr.wra_quantized);
  return RsiEncodeStatus::ok;
}

RsiDecodeResult decode_rsi(std::span<const std::uint8_t> bytes, SimTime d_max_us) {
  RsiDecodeResult r;
  if (bytes.size() != kRsiWireBytes) {
    r.status = RsiDecodeStatus::truncated_frame;
    return r;
  }
  RsiInstruction& i = r.instruction;
  std::copy(bytes.begin(), bytes.begin() + 6, i.owner_source.begin());
  std::copy(bytes.begin() + 6, bytes.begin() + 12, i.link_destination.begin());
  i.offset_us = get_u32_be(bytes.data() + 12);
  i.duration_us = get_u32_be(bytes.data() + 16);
  i.wra_quantized = static_cast<std::uint16_t>((bytes[20] << 8) | bytes[21]);
  if (static_cast<SimTime>(i.duration_us) > d_max_us) {
    r.status = RsiDecodeStatus::invalid_duration;
  }
  return r;
}

std::optional<RsiInstruction> make_rsi(NodeId owner, NodeId destination, SimTime offset_us,
                                       SimTime duration_us, WraBytes wra) {
  constexpr SimTime kMax = std::numeric_limits<std::uint32_t>::max();
  if (offset_us > kMax || duration_us > kMax) return std::nullopt;
  RsiInstruction i;
  i.owner_source = addr_from_node(owner);
  i.link_destination = addr_from_node(destination);
  i.offset_us = static_cast<std::uint32_t>(offset_us);
  i.duration_us = static_cast<std::uint32_t>(duration_us);
  i.wra_quantized = quantize_wra(wra);
  return i;
}

SimTime ampdu_air_time(std::span<const QueuedPacket> packets, bool with_rsi,
                       const ProtocolParams& p) {
  double bits = 0.0;
  for (const QueuedPacket& pkt : packets)
    bits += static_cast<double>(pkt.length_bytes + kMpduDelimiterBytes) * 8.0;
  if (with_rsi) bits += static_cast<double>(kRsiWireBytes + kMpduDelimiterBytes) * 8.0;
  return to_sim_time(bits / p.v_phy_bits_per_us);
}

MacFrame build_ampdu(NodeId transmitter, NodeId receiver, std::vector<QueuedPacket> packets,
                     std::optional<RsiInstruction> rsi, const ProtocolParams& p) {
  assert(!packets.empty() || rsi.has_value());
  MacFrame f;
  f.kind = FrameKind::data_ampdu;
  f.transmitter = transmitter;
  f.receiver = receiver;
  f.air_time_us = ampdu_air_time(packets, rsi.has_value(), p);
  f.mpdus = std::move(packets);
  f.rsi = std::move(rsi);
  return f;
}

}  // namespace crmsim
