#include "ppqc/protocol.hpp"

#include "ppqc/errors.hpp"

namespace ppqc {

YZ checked_sum(YZ a, YZ b) { return {checked_add(a.y, b.y), checked_add(a.z, b.z)}; }

namespace {

std::vector<Message> broadcast(const NodeContext& ctx, YZ payload, std::int64_t round) {
  std::vector<Message> out;
  out.reserve(ctx.out_neighbors.size());
  for (NodeId dst : ctx.out_neighbors) {
    out.push_back({MessageKind::StateBroadcast, ctx.id, dst, round, payload});
  }
  return out;
}

}  // namespace

InitResult init_node(const NodeContext& ctx) {
  if (ctx.schedule == nullptr || ctx.schedule->length() == 0) {
    throw InvalidSchedule("node " + std::to_string(ctx.id) + " has no schedule");
  }
  if (ctx.out_neighbors.empty()) {
    throw ContractViolation("node " + std::to_string(ctx.id) + " has no out-neighbors");
  }
  NodeState node;
  node.id = ctx.id;
  node.mass = {ctx.schedule->substate_y(0), ctx.schedule->substate_z(0)};
  node.state = node.mass;
  node.s = 1;
  return {node, broadcast(ctx, node.state, -1)};
}

NodeState apply_event_triggers(NodeState node, std::span<const YZ> received_states,
                               std::uint8_t* fired) {
  std::uint8_t bits = kTriggerNone;
  // Received states are compared as (z, y); the lex-max also resolves ties
  // among several equally large broadcasts.
  for (const YZ& incoming : received_states) {
    if (incoming > node.state) {
      node.state = incoming;
      node.s_br = true;
      bits |= kTriggerAdoptState;
    }
  }
  if (node.mass > node.state) {
    node.state = node.mass;
    node.s_br = true;
    bits |= kTriggerPromoteMass;
  }
  const bool dominated_z = node.mass.z > 0 && node.mass.z < node.state.z;
  const bool dominated_y = node.mass.z == node.state.z && node.mass.y < node.state.y;
  if (dominated_z || dominated_y) {
    node.m_tr = true;
    bits |= kTriggerTransferMass;
  }
  if (fired != nullptr) *fired = bits;
  return node;
}

StepResult step_node(const NodeContext& ctx, NodeState node, std::span<const Message> inbox,
                     std::int64_t round) {
  std::vector<YZ> states;
  bool received_any = false;
  for (const Message& msg : inbox) {
    if (msg.dst != ctx.id || msg.round != round - 1) {
      throw ContractViolation("node " + std::to_string(ctx.id) + " received a message for node " +
                              std::to_string(msg.dst) + " from round " +
                              std::to_string(msg.round) + " in round " + std::to_string(round));
    }
    received_any = true;
    if (msg.kind == MessageKind::MassTransfer) {
      node.mass = checked_sum(node.mass, msg.payload);
    } else {
      states.push_back(msg.payload);
    }
  }

  StepResult result;
  if (received_any) node = apply_event_triggers(node, states, &result.triggers);

  const SubstateSchedule& sched = *ctx.schedule;
  if (sched.substate_z(node.s) >= 1) node.m_tr = true;

  if (node.m_tr) {
    node.mass = checked_sum(node.mass, {sched.substate_y(node.s), sched.substate_z(node.s)});
    const NodeId dst = ctx.out_neighbors[node.rr_cursor];
    node.rr_cursor = (node.rr_cursor + 1) % ctx.out_neighbors.size();
    result.outbox.push_back({MessageKind::MassTransfer, ctx.id, dst, round, node.mass});
    node.mass = {};
    node.m_tr = false;
    ++node.s;
  }
  if (node.s_br) {
    auto copies = broadcast(ctx, node.state, round);
    result.outbox.insert(result.outbox.end(), copies.begin(), copies.end());
    node.s_br = false;
  }
  result.node = node;
  return result;
}

}  // namespace ppqc
