#pragma once

#include <cstdint>

#include "crmsim/time.hpp"

namespace crmsim {

using NodeId = std::uint32_t;

constexpr NodeId kNoNode = static_cast<NodeId>(-1);

// A buffered MAC-layer packet. hop_count is the number of times the packet
// has already been forwarded: 0 means it was generated locally at the node
// holding it, >=1 means relay traffic. It increments by exactly one each
// time the packet is handed to the next hop.
struct QueuedPacket {
  std::uint64_t id = 0;
  NodeId source = kNoNode;
  NodeId final_destination = kNoNode;
  std::uint32_t length_bytes = 0;
  std::uint32_t hop_count = 0;
  SimTime created_at = 0;
  bool is_realtime = true;

  bool is_local() const { return hop_count == 0; }
};

}  // namespace crmsim
