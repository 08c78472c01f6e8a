#include "crmsim/channel.hpp"

#include <algorithm>
#include <cassert>

namespace crmsim {

std::uint64_t Channel::begin_tx(NodeId sender, MacFrame frame, SimTime end_us,
                                const std::vector<NodeId>& listeners) {
  ActiveTx tx;
  tx.id = next_id_++;
  tx.sender = sender;
  tx.end_us = end_us;
  tx.frame = std::move(frame);
  tx.listeners.reserve(listeners.size());
  for (NodeId n : listeners) tx.listeners.emplace_back(n, ListenerState::clean);

  // The new carrier corrupts receptions in progress wherever both senders
  // are audible, and those transmissions corrupt the new one's listeners
  // the same way.
  for (ActiveTx& other : active_) {
    for (auto& [node, state] : other.listeners) {
      if (state == ListenerState::clean && topo_->in_range(node, sender))
        state = ListenerState::collided;
    }
    for (auto& [node, state] : tx.listeners) {
      if (state == ListenerState::clean && topo_->in_range(node, other.sender))
        state = ListenerState::collided;
    }
  }
  // A node cannot receive while it transmits.
  drop_listener(sender);
  active_.push_back(std::move(tx));
  return active_.back().id;
}

void Channel::drop_listener(NodeId node) {
  for (ActiveTx& tx : active_) {
    for (auto& [n, state] : tx.listeners) {
      if (n == node) state = ListenerState::dropped;
    }
  }
}

Channel::EndResult Channel::end_tx(std::uint64_t tx_id) {
  auto it = std::find_if(active_.begin(), active_.end(),
                         [tx_id](const ActiveTx& t) { return t.id == tx_id; });
  assert(it != active_.end());
  EndResult result;
  result.frame = std::move(it->frame);
  result.outcomes.reserve(it->listeners.size());
  for (const auto& [node, state] : it->listeners) {
    if (state == ListenerState::dropped) continue;
    result.outcomes.push_back({node, state == ListenerState::collided});
  }
  active_.erase(it);
  return result;
}

int Channel::active_count_in_range(NodeId node) const {
  int count = 0;
  for (const ActiveTx& tx : active_) {
    if (tx.sender != node && topo_->in_range(node, tx.sender)) ++count;
  }
  return count;
}

}  // namespace crmsim
