#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ppqc/graph.hpp"
#include "ppqc/schedule.hpp"

namespace ppqc {

// An exact (y, z) pair. Mass variables and state variables share the type;
// the state ratio q^s is y / z and is never rounded. Ordering is
// lexicographic on (z, y), which is the order every event trigger uses.
struct YZ {
  std::int64_t y = 0;
  std::int64_t z = 0;

  bool is_zero() const { return y == 0 && z == 0; }

  friend bool operator==(const YZ&, const YZ&) = default;
  friend std::strong_ordering operator<=>(const YZ& a, const YZ& b) {
    if (auto c = a.z <=> b.z; c != 0) return c;
    return a.y <=> b.y;
  }
};

YZ checked_sum(YZ a, YZ b);

enum class MessageKind : std::uint8_t { StateBroadcast, MassTransfer };

// One point-to-point delivery. A broadcast is expanded into one message per
// out-neighbor. Messages sent in round r are consumed in round r + 1; the
// initialization broadcast has round -1.
struct Message {
  MessageKind kind = MessageKind::StateBroadcast;
  NodeId src = 0;
  NodeId dst = 0;
  std::int64_t round = 0;
  YZ payload;

  friend bool operator==(const Message&, const Message&) = default;
};

// Which event-trigger conditions fired for a node in a round.
enum TriggerBits : std::uint8_t {
  kTriggerNone = 0,
  kTriggerAdoptState = 1 << 0,    // ETC1
  kTriggerPromoteMass = 1 << 1,   // ETC2
  kTriggerTransferMass = 1 << 2,  // ETC3
};

struct NodeState {
  NodeId id = 0;
  YZ mass;             // y_j, z_j
  YZ state;            // y^s_j, z^s_j
  std::size_t s = 0;   // substate counter
  bool s_br = false;   // broadcast pending
  bool m_tr = false;   // mass transfer pending
  std::size_t rr_cursor = 0;

  friend bool operator==(const NodeState&, const NodeState&) = default;
};

// Static per-node data the transition needs alongside its state.
struct NodeContext {
  NodeId id = 0;
  std::span<const NodeId> out_neighbors;  // round-robin order
  const SubstateSchedule* schedule = nullptr;
};

struct InitResult {
  NodeState node;
  std::vector<Message> broadcast;  // one copy per out-neighbor, round -1
};

// Loads substate 0 as mass and state, sets s = 1 and broadcasts the state.
InitResult init_node(const NodeContext& ctx);

// Event-trigger conditions run in order against `node.state`, each seeing
// the updates of the previous one. `node.mass` must already hold the mass
// merged this round.
//   1. adopt the lexicographically largest received state if it beats ours;
//   2. promote the held mass to state if it beats the (updated) state;
//   3. request a mass transfer if a nonzero mass is dominated by the state.
NodeState apply_event_triggers(NodeState node, std::span<const YZ> received_states,
                               std::uint8_t* fired = nullptr);

struct StepResult {
  NodeState node;
  std::vector<Message> outbox;
  std::uint8_t triggers = kTriggerNone;
};

// One synchronous iteration. `inbox` must be exactly the messages addressed to
// this node that were sent in round - 1. Returned messages carry `round`.
StepResult step_node(const NodeContext& ctx, NodeState node, std::span<const Message> inbox,
                     std::int64_t round);

}  // namespace ppqc
