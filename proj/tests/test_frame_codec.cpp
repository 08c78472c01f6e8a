#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "crmsim/frame.hpp"
#include "crmsim/rng.hpp"

using namespace crmsim;

namespace {

std::string to_hex(const std::array<std::uint8_t, kRsiWireBytes>& bytes) {
  std::string out;
  char buf[3];
  for (std::uint8_t b : bytes) {
    std::snprintf(buf, sizeof buf, "%02X", b);
    out += buf;
  }
  return out;
}

std::vector<std::uint8_t> from_hex(const std::string& hex) {
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2)
    out.push_back(static_cast<std::uint8_t>(std::stoul(hex.substr(i, 2), nullptr, 16)));
  return out;
}

// Set by the test runner via --data-dir in the acceptance binary; unit tests
// resolve relative to the source tree layout.
std::string golden_path() {
  for (const char* p : {"tests/data/rsi_golden.txt", "../tests/data/rsi_golden.txt",
                        "../../tests/data/rsi_golden.txt", "data/rsi_golden.txt"}) {
    std::ifstream probe(p);
    if (probe) return p;
  }
  return "tests/data/rsi_golden.txt";
}

}  // namespace

TEST_CASE("zero instruction encodes to 22 zero bytes") {
  RsiInstruction zero;
  std::array<std::uint8_t, kRsiWireBytes> wire{};
  REQUIRE(encode_rsi(zero, wire) == RsiEncodeStatus::ok);
  for (std::uint8_t b : wire) CHECK(b == 0);
  const auto decoded = decode_rsi(wire, 5000);
  CHECK(decoded.status == RsiDecodeStatus::ok);
  CHECK(decoded.instruction == zero);
}

TEST_CASE("weight field is big-endian in the last two bytes") {
  RsiInstruction instr;
  instr.wra_quantized = 0x0102;
  std::array<std::uint8_t, kRsiWireBytes> wire{};
  REQUIRE(encode_rsi(instr, wire) == RsiEncodeStatus::ok);
  CHECK(wire[20] == 0x01);
  CHECK(wire[21] == 0x02);
}

TEST_CASE("golden wire vectors stay byte-exact") {
  std::ifstream f(golden_path());
  REQUIRE_MESSAGE(f.good(), "golden vector file missing: " << golden_path());
  std::string line;
  int vectors = 0;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::uint32_t owner, dest;
    std::uint64_t offset, duration;
    std::uint32_t wra_q;
    std::string hex;
    ss >> owner >> dest >> offset >> duration >> wra_q >> hex;
    REQUIRE(ss);

    RsiInstruction instr;
    instr.owner_source = addr_from_node(owner);
    instr.link_destination = addr_from_node(dest);
    instr.offset_us = static_cast<std::uint32_t>(offset);
    instr.duration_us = static_cast<std::uint32_t>(duration);
    instr.wra_quantized = static_cast<std::uint16_t>(wra_q);

    std::array<std::uint8_t, kRsiWireBytes> wire{};
    REQUIRE(encode_rsi(instr, wire) == RsiEncodeStatus::ok);
    CHECK(to_hex(wire) == hex);

    const auto bytes = from_hex(hex);
    const auto decoded = decode_rsi(bytes, ~0ull);
    REQUIRE(decoded.status == RsiDecodeStatus::ok);
    CHECK(decoded.instruction == instr);
    ++vectors;
  }
  CHECK(vectors >= 3);
}

TEST_CASE("round trip holds over random instructions") {
  Rng rng(101, 3);
  for (int iter = 0; iter < 10000; ++iter) {
    RsiInstruction instr;
    instr.owner_source = addr_from_node(static_cast<NodeId>(rng.next_u64()));
    instr.link_destination = addr_from_node(static_cast<NodeId>(rng.next_u64()));
    instr.offset_us = static_cast<std::uint32_t>(rng.next_u64());
    instr.duration_us = static_cast<std::uint32_t>(rng.next_u64());
    instr.wra_quantized = static_cast<std::uint16_t>(rng.next_u64());

    std::array<std::uint8_t, kRsiWireBytes> wire{};
    REQUIRE(encode_rsi(instr, wire) == RsiEncodeStatus::ok);
    const auto decoded = decode_rsi(wire, ~0ull);
    REQUIRE(decoded.status == RsiDecodeStatus::ok);
    REQUIRE(decoded.instruction == instr);
  }
}

TEST_CASE("decode guards") {
  std::vector<std::uint8_t> short_frame(21, 0);
  CHECK(decode_rsi(short_frame, 5000).status == RsiDecodeStatus::truncated_frame);

  RsiInstruction instr;
  instr.duration_us = 6000;
  std::array<std::uint8_t, kRsiWireBytes> wire{};
  REQUIRE(encode_rsi(instr, wire) == RsiEncodeStatus::ok);
  CHECK(decode_rsi(wire, 5000).status == RsiDecodeStatus::invalid_duration);
  CHECK(decode_rsi(wire, 6000).status == RsiDecodeStatus::ok);
}

TEST_CASE("field overflow is rejected when building from simulation times") {
  CHECK(make_rsi(1, 2, 1ull << 33, 1000, 0.0) == std::nullopt);
  CHECK(make_rsi(1, 2, 1000, 1ull << 33, 0.0) == std::nullopt);
  CHECK(make_rsi(1, 2, 2232, 1000, 600.0).has_value());
}

TEST_CASE("weight quantization stays within half a step below saturation") {
  Rng rng(7, 77);
  for (int iter = 0; iter < 2000; ++iter) {
    const double wra = rng.uniform(0.0, 65000.0 * kWraQuantStepBytes);
    const double back = dequantize_wra(quantize_wra(wra));
    CHECK(std::abs(back - wra) <= kWraQuantStepBytes / 2.0 + 1e-9);
  }
  CHECK(quantize_wra(1e12) == 65535);
  CHECK(quantize_wra(-5.0) == 0);
}

TEST_CASE("aggregate air time is additive and counts the instruction MPDU") {
  const ProtocolParams p = default_params();
  QueuedPacket pkt;
  pkt.length_bytes = 1500;

  std::vector<QueuedPacket> one{pkt};
  // (1500 + 4 delimiter) * 8 / 24 = 501.33 -> 501
  CHECK(ampdu_air_time(one, false, p) == 501);

  std::vector<QueuedPacket> two{pkt, pkt};
  std::vector<QueuedPacket> four{pkt, pkt, pkt, pkt};
  const SimTime a2 = ampdu_air_time(two, false, p);
  const SimTime a4 = ampdu_air_time(four, false, p);
  // Additive in real arithmetic; integer commitment may shift by one.
  CHECK(std::llabs(static_cast<long long>(a4) - 2ll * static_cast<long long>(a2)) <= 1);

  // Instruction-only frame is legal.
  const MacFrame rsi_only = build_ampdu(1, 2, {}, RsiInstruction{}, p);
  CHECK(rsi_only.air_time_us == to_sim_time((kRsiWireBytes + kMpduDelimiterBytes) * 8.0 /
                                            p.v_phy_bits_per_us));
  CHECK(rsi_only.mpdus.empty());
  CHECK(rsi_only.rsi.has_value());
}

TEST_CASE("node ids and addresses are inverse maps") {
  for (NodeId id : {0u, 1u, 77u, 65535u, 1u << 20}) {
    CHECK(node_from_addr(addr_from_node(id)) == id);
  }
}
