#pragma once

#include <cstdint>
#include <vector>

#include "crmsim/frame.hpp"
#include "crmsim/topology.hpp"

namespace crmsim {

// Unit-disk, collision-only medium. Every listener inside the sender's
// range decodes a frame unless some other transmission overlapped its
// reception window, in which case that listener records a collision and
// decodes nothing. No capture, no fading, no partial loss.
class Channel {
 public:
  explicit Channel(const Topology* topo) : topo_(topo) {}

  struct Outcome {
    NodeId receiver = kNoNode;
    bool collided = false;  // false entries decode the frame
  };

  // Registers a transmission. `listeners` are the nodes able to receive at
  // start time (awake, not transmitting); interference against concurrent
  // transmissions is marked on both sides here.
  std::uint64_t begin_tx(NodeId sender, MacFrame frame, SimTime end_us,
                         const std::vector<NodeId>& listeners);

  // Removes a node from every pending reception (it started transmitting
  // or fell asleep); such receptions end as silent misses.
  void drop_listener(NodeId node);

  // Finishes a transmission, returning its frame and the fate of every
  // listener that stayed eligible.
  struct EndResult {
    MacFrame frame;
    std::vector<Outcome> outcomes;
  };
  EndResult end_tx(std::uint64_t tx_id);

  // Number of in-flight transmissions audible at `node` (used to resync
  // carrier sense after sleep).
  int active_count_in_range(NodeId node) const;

  bool idle() const { return active_.empty(); }

 private:
  enum class ListenerState : std::uint8_t { clean, collided, dropped };
  struct ActiveTx {
    std::uint64_t id = 0;
    NodeId sender = kNoNode;
    SimTime end_us = 0;
    MacFrame frame;
    std::vector<std::pair<NodeId, ListenerState>> listeners;
  };

  const Topology* topo_;
  std::vector<ActiveTx> active_;
  std::uint64_t next_id_ = 1;
};

}  // namespace crmsim
